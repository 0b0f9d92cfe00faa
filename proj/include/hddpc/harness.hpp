#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hddpc/config.hpp"
#include "hddpc/dataset.hpp"
#include "hddpc/planner.hpp"
#include "hddpc/plant.hpp"

// Data collection, the closed-loop experiment runner, and the metric
// computation behind the three comparison arms.

namespace hddpc {

enum class Arm { Nominal, Ddpc, Hddpc };

const char* to_string(Arm arm);
std::optional<Arm> arm_from_string(const std::string& s);

struct GaitScheduleEntry {
  Eigen::Vector2d step_length = Eigen::Vector2d::Zero();  // (x, signed y width)
  double duration = 1.0;
  StanceSide side = StanceSide::Left;
};

struct GaitSchedule {
  std::vector<GaitScheduleEntry> entries;  // chronological, lead-in first
};

// Lead-in step plus two steps per cycle, widths signed by stance side.
GaitSchedule make_collection_schedule(const CollectionConfig& collection);

// Walk the schedule under the orbit-tracking CoP policy and record the
// dataset blocks. Throws Error(CollectionFellOver) if the plant falls.
Dataset collect_dataset(const ToolConfig& config);

enum class Outcome { Completed, Fell };

struct TickRecord {
  double time = 0.0;
  Eigen::Vector2d com_world = Eigen::Vector2d::Zero();
  Eigen::Vector2d com_vel = Eigen::Vector2d::Zero();
  Eigen::Vector2d cop_world = Eigen::Vector2d::Zero();
  Eigen::Vector2d stance_world = Eigen::Vector2d::Zero();
  double tau = 0.0;
  int domain = 0;
  bool perturb_active = false;
};

struct ReplanRecord {
  double time = 0.0;
  int domain = 0;
  double tau = 0.0;
  std::vector<Eigen::MatrixXd> alpha;
  std::vector<Eigen::Vector2d> lambda;
  std::vector<double> t_step;
  double gamma_norm = 0.0;
  double sigma_norm = 0.0;
  double objective = 0.0;
  int iterations = 0;
  double solve_ms = 0.0;  // console diagnostics; not serialized
  bool accepted = true;
};

struct RunLog {
  Arm arm = Arm::Nominal;
  unsigned long seed = 1;
  double duration = 0.0;
  Outcome outcome = Outcome::Completed;
  double fall_time = -1.0;
  std::vector<TickRecord> ticks;
  std::vector<ReplanRecord> replans;
  std::vector<Perturbation> perturbations;
};

Json runlog_to_json(const RunLog& log);
void write_runlog_csv(const std::string& path, const RunLog& log);

// Impulses every `interval` seconds at 45-degree-quantized directions with
// uniform magnitudes in [magnitude_min, magnitude_max]; one schedule shared
// across arms for a fixed seed.
std::vector<Perturbation> make_perturbation_schedule(const PerturbationConfig& cfg,
                                                     double duration, unsigned long seed);

RunLog run_closed_loop(Arm arm, const ToolConfig& config, const Dataset* dataset,
                       const std::vector<Perturbation>& perturbations, double duration,
                       unsigned long seed);

struct SpeedMetrics {
  double v_des = 0.0;
  double realized_mean = 0.0;
  double realized_std = 0.0;
  bool fell = false;
  double fall_time = -1.0;
};

struct ArmMetrics {
  Arm arm = Arm::Nominal;
  Outcome outcome = Outcome::Completed;
  double fall_time = -1.0;
  double realized_mean = 0.0;
  double realized_std = 0.0;
  double slack_mean = 0.0;
  double slack_max = 0.0;
  int solve_iterations_median = 0;
  int solve_iterations_max = 0;
  double solve_ms_median = 0.0;  // console diagnostics; not serialized
  double solve_ms_max = 0.0;
};

struct ExperimentReport {
  unsigned long seed = 1;
  std::string perturbation_schedule_hash;
  std::vector<ArmMetrics> arms;
  std::vector<SpeedMetrics> tracking;
};

// Metrics recomputed from a run log alone.
ArmMetrics metrics_from_log(const RunLog& log, double window);

Json report_to_json(const ExperimentReport& report);

// Speed sweep of the HDDPC arm; per speed the run must cover `duration`
// seconds and the realized speed is measured over the trailing window.
ExperimentReport tracking_experiment(const ToolConfig& config, const Dataset& dataset,
                                     const std::vector<double>& speeds, double duration);

// All three arms under one seeded perturbation schedule.
ExperimentReport perturbation_experiment(const ToolConfig& config, const Dataset& dataset,
                                         unsigned long seed);

std::string schedule_hash(const std::vector<Perturbation>& perturbations);

}  // namespace hddpc
