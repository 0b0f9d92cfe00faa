#include "hddpc/hankel.hpp"

#include <Eigen/SVD>

#include "hddpc/errors.hpp"

namespace hddpc {

HankelMatrix build_page_matrix(const DatasetCollection& collection, Channel channel, int L) {
  if (collection.trajectories.empty()) {
    throw Error(ErrorKind::EmptyCollection, "no trajectories in collection");
  }
  const Eigen::Index d = collection.trajectories.front().channel(channel).rows();
  const Eigen::Index cols = static_cast<Eigen::Index>(collection.trajectories.size());
  HankelMatrix h;
  h.block_dim = static_cast<int>(d);
  h.L = L;
  h.column_mode = ColumnMode::Page;
  h.data.resize(d * L, cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const Eigen::MatrixXd& block = collection.trajectories[static_cast<size_t>(i)].channel(channel);
    if (block.rows() != d) {
      throw Error(ErrorKind::ShapeMismatch, "trajectories have differing channel dimension");
    }
    if (block.cols() < L) {
      throw Error(ErrorKind::TrajectoryTooShort, "trajectory shorter than window length");
    }
    for (int k = 0; k < L; ++k) {
      h.data.block(d * k, i, d, 1) = block.col(k);
    }
  }
  return h;
}

HankelMatrix build_sliding_matrix(const Trajectory& trajectory, Channel channel, int L) {
  const Eigen::MatrixXd& block = trajectory.channel(channel);
  const Eigen::Index d = block.rows();
  const Eigen::Index T = block.cols();
  if (T < L) throw Error(ErrorKind::TrajectoryTooShort, "trajectory shorter than window length");
  const Eigen::Index cols = T - L + 1;
  HankelMatrix h;
  h.block_dim = static_cast<int>(d);
  h.L = L;
  h.column_mode = ColumnMode::Sliding;
  h.data.resize(d * L, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (int k = 0; k < L; ++k) {
      h.data.block(d * k, j, d, 1) = block.col(j + k);
    }
  }
  return h;
}

HankelMatrix select(Eigen::Index start_row, Eigen::Index block_rows, const HankelMatrix& h) {
  if (start_row < 0 || block_rows < 0 || start_row + block_rows > h.rows()) {
    throw Error(ErrorKind::OutOfRange, "selection exceeds matrix rows");
  }
  HankelMatrix out;
  out.data = h.data.middleRows(start_row, block_rows);
  out.column_mode = h.column_mode;
  if (h.block_dim > 0 && block_rows % h.block_dim == 0) {
    out.block_dim = h.block_dim;
    out.L = static_cast<int>(block_rows) / h.block_dim;
  } else {
    out.block_dim = 1;
    out.L = static_cast<int>(block_rows);
  }
  return out;
}

Partition partition(const HankelMatrix& h_u, const HankelMatrix& h_y, const PartitionSpec& spec) {
  if (spec.t_ini < 1 || spec.n < 1) {
    throw Error(ErrorKind::ShapeMismatch, "t_ini and n must both be at least 1");
  }
  const int L = spec.t_ini + spec.n;
  const Eigen::Index kappa = h_u.block_dim;
  const Eigen::Index nu = h_y.block_dim;
  if (h_u.rows() != kappa * L || h_y.rows() != nu * L) {
    throw Error(ErrorKind::ShapeMismatch, "partition spec does not match matrix rows");
  }
  if (h_u.cols() != h_y.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "input and output Hankels have different column counts");
  }
  Partition p;
  p.u_past = select(0, kappa * spec.t_ini, h_u).data;
  p.u_future = select(kappa * spec.t_ini, kappa * spec.n, h_u).data;
  p.y_past = select(0, nu * spec.t_ini, h_y).data;
  p.y_future = select(nu * spec.t_ini, nu * spec.n, h_y).data;
  return p;
}

PersistencyReport persistency_order(const HankelMatrix& h, double tolerance) {
  PersistencyReport report;
  if (h.rows() == 0 || h.cols() == 0) return report;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h.data);
  const auto& sv = svd.singularValues();
  const double cutoff = tolerance * sv(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  report.numerical_rank = rank;
  report.full_row_rank = rank == h.rows();
  report.order = report.full_row_rank ? h.L : 0;
  return report;
}

HankelMatrix compose_domain_hankel(const std::vector<Eigen::MatrixXd>& prev_blocks,
                                   const std::vector<Eigen::MatrixXd>& cur_blocks,
                                   const std::vector<Eigen::VectorXd>& foot_placements,
                                   int t_ini) {
  const size_t count = cur_blocks.size();
  if (count == 0) throw Error(ErrorKind::EmptyCollection, "no datasets to compose");
  if (prev_blocks.size() != count || foot_placements.size() != count) {
    throw Error(ErrorKind::MissingTransitionData,
                "previous-domain tails and placements must match dataset count");
  }
  const Eigen::Index d = cur_blocks.front().rows();
  const Eigen::Index n_cur = cur_blocks.front().cols();
  HankelMatrix h;
  h.block_dim = static_cast<int>(d);
  h.L = t_ini + static_cast<int>(n_cur);
  h.column_mode = ColumnMode::Page;
  h.data.resize(d * h.L, static_cast<Eigen::Index>(count));
  for (size_t i = 0; i < count; ++i) {
    const Eigen::MatrixXd& prev = prev_blocks[i];
    const Eigen::MatrixXd& cur = cur_blocks[i];
    const Eigen::VectorXd& lambda = foot_placements[i];
    if (prev.rows() != d || cur.rows() != d || cur.cols() != n_cur) {
      throw Error(ErrorKind::ShapeMismatch, "dataset blocks have inconsistent shapes");
    }
    if (prev.cols() < t_ini) {
      throw Error(ErrorKind::MissingTransitionData, "previous-domain tail shorter than t_ini");
    }
    if (lambda.size() != d) {
      throw Error(ErrorKind::ShapeMismatch, "placement dimension does not match channel");
    }
    const Eigen::Index col = static_cast<Eigen::Index>(i);
    for (int k = 0; k < t_ini; ++k) {
      h.data.block(d * k, col, d, 1) = prev.col(prev.cols() - t_ini + k) - lambda;
    }
    for (Eigen::Index k = 0; k < n_cur; ++k) {
      h.data.block(d * (t_ini + k), col, d, 1) = cur.col(k);
    }
  }
  return h;
}

}  // namespace hddpc
