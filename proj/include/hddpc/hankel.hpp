#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

// Trajectory (page) Hankel matrices over multi-experiment walking data:
// construction, row-block selection, past/future partitioning, persistency
// of excitation checks, and the domain-composed matrices that stitch the
// tail of one stance phase onto the next through the stance-frame shift.

namespace hddpc {

enum class StanceSide { Left, Right };

inline StanceSide other_side(StanceSide s) {
  return s == StanceSide::Left ? StanceSide::Right : StanceSide::Left;
}

inline const char* to_string(StanceSide s) { return s == StanceSide::Left ? "L" : "R"; }

enum class Channel { Input, Output };

enum class ColumnMode { Page, Sliding };

struct ChannelSpec {
  int input_dim = 2;   // kappa
  int output_dim = 2;  // nu
  std::vector<std::string> input_names{"cop_x", "cop_y"};
  std::vector<std::string> output_names{"com_x", "com_y"};
};

// One recorded stance phase: inputs/outputs sampled on a uniform phase grid.
// Channel values are stored one column per sample.
struct Trajectory {
  Eigen::MatrixXd inputs;        // input_dim x T
  Eigen::MatrixXd outputs;       // output_dim x T
  std::vector<double> phase_grid;
  double duration = 1.0;         // seconds
  StanceSide stance_side = StanceSide::Left;
  Eigen::Vector2d step_length = Eigen::Vector2d::Zero();  // placement into this step

  const Eigen::MatrixXd& channel(Channel c) const {
    return c == Channel::Input ? inputs : outputs;
  }
  int samples() const { return static_cast<int>(outputs.cols()); }
};

struct DatasetCollection {
  std::vector<Trajectory> trajectories;
  ChannelSpec channel_spec;
  double delta_tau = 0.02;
};

struct HankelMatrix {
  Eigen::MatrixXd data;  // (block_dim * L) x columns
  int block_dim = 1;     // per-sample dimension
  int L = 0;             // window length in samples
  ColumnMode column_mode = ColumnMode::Page;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
};

struct PartitionSpec {
  int t_ini = 4;
  int n = 46;
};

struct Partition {
  Eigen::MatrixXd u_past;
  Eigen::MatrixXd u_future;
  Eigen::MatrixXd y_past;
  Eigen::MatrixXd y_future;
};

struct PersistencyReport {
  Eigen::Index numerical_rank = 0;
  bool full_row_rank = false;
  int order = 0;  // equals L when full row rank
};

// One column per trajectory: the first L samples stacked per sample.
HankelMatrix build_page_matrix(const DatasetCollection& collection, Channel channel, int L);

// Classic sliding-window Hankel over a single trajectory (T-L+1 columns).
HankelMatrix build_sliding_matrix(const Trajectory& trajectory, Channel channel, int L);

// Contiguous row block [start_row, start_row + block_rows) over all columns.
HankelMatrix select(Eigen::Index start_row, Eigen::Index block_rows, const HankelMatrix& h);

// Split input/output Hankels into estimation (past) and prediction (future).
Partition partition(const HankelMatrix& h_u, const HankelMatrix& h_y, const PartitionSpec& spec);

// Numerical-rank report; full_row_rank iff rank == rows at the given
// relative tolerance.
PersistencyReport persistency_order(const HankelMatrix& h, double tolerance = 1e-10);

// Domain-composed matrix: per column, the transformed tail (last t_ini
// samples minus that dataset's transition placement) of the previous domain
// stacked over the current domain's samples.
HankelMatrix compose_domain_hankel(const std::vector<Eigen::MatrixXd>& prev_blocks,
                                   const std::vector<Eigen::MatrixXd>& cur_blocks,
                                   const std::vector<Eigen::VectorXd>& foot_placements,
                                   int t_ini);

}  // namespace hddpc
