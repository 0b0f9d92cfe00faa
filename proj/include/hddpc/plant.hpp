#pragma once

#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hddpc/hankel.hpp"
#include "hddpc/rom.hpp"

// Reduced hybrid bipedal plant: a planar variable-height pendulum with CoP
// actuator lag, process noise, impulse perturbations, and hybrid impact
// resets. The nonlinearities are the model mismatch that makes the
// Hankel-matrix identification nontrivial.

namespace hddpc {

struct PlantConfig {
  LipParams lip;
  double height_wobble_amplitude = 0.027;  // m, z(tau) = z0 + a*sin(2*pi*tau)
  double cop_lag_time_constant = 0.03;     // s, first-order actuator lag
  double process_noise_std = 0.0;          // velocity diffusion intensity, m/s per sqrt(s)
  Eigen::Vector2d cop_halfwidth{0.08, 0.05};  // support polygon box, m
  double early_impact_phase_jitter = 0.0;  // fraction of step
  double min_phase_threshold = 0.3;
  double fall_position_limit = 0.6;   // m
  double fall_velocity_limit = 2.0;   // m/s
  double dt = 1e-3;                   // s, RK4 step
  unsigned long seed = 1;
};

struct PlantState {
  Eigen::Vector2d com = Eigen::Vector2d::Zero();      // relative to stance foot, m
  Eigen::Vector2d com_vel = Eigen::Vector2d::Zero();  // m/s
  Eigen::Vector2d cop_actual = Eigen::Vector2d::Zero();
  Eigen::Vector2d stance_world = Eigen::Vector2d::Zero();
  StanceSide stance_side = StanceSide::Left;
  double tau = 0.0;               // phase in [0,1]
  int domain_index = 0;
  double time = 0.0;              // s
  double early_impact_phase = 2.0;  // sampled per domain; 2.0 when jitter is off
};

struct Perturbation {
  double time = 0.0;      // s
  double duration = 0.01; // s
  Eigen::Vector2d delta_v = Eigen::Vector2d::Zero();  // m/s over the window
};

enum class GuardEvent { None, Impact };

class Plant {
 public:
  explicit Plant(const PlantConfig& config);

  // Advance one tick of dt under the (clamped) CoP command. step_duration
  // drives the phase variable.
  PlantState step(const PlantState& state, const Eigen::Vector2d& u_cop_command,
                  double step_duration, std::span<const Perturbation> perturbations) const;

  GuardEvent check_guard(const PlantState& state) const;

  // Hybrid reset: relabel stance by the executed placement, flip sides,
  // sample the next domain's early-impact phase.
  PlantState apply_impact(const PlantState& state, const Eigen::Vector2d& lambda);

  bool is_fallen(const PlantState& state) const;

  // Initial state helper; samples the first domain's early-impact phase.
  PlantState make_initial(const Eigen::Vector2d& com, const Eigen::Vector2d& vel,
                          StanceSide side);

  const PlantConfig& config() const { return config_; }

 private:
  double sample_early_impact_phase();

  PlantConfig config_;
  mutable std::mt19937_64 rng_;
  mutable std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace hddpc
