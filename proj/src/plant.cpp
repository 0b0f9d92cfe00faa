#include "hddpc/plant.hpp"

#include <cmath>

#include "hddpc/log.hpp"

namespace hddpc {

namespace {

Eigen::Vector2d clamp_to_box(const Eigen::Vector2d& v, const Eigen::Vector2d& halfwidth) {
  return v.cwiseMax(-halfwidth).cwiseMin(halfwidth);
}

}  // namespace

Plant::Plant(const PlantConfig& config) : config_(config), rng_(config.seed) {}

double Plant::sample_early_impact_phase() {
  if (config_.early_impact_phase_jitter <= 0.0) return 2.0;
  const double lo = std::max(config_.min_phase_threshold, 1.0 - config_.early_impact_phase_jitter);
  std::uniform_real_distribution<double> dist(lo, 1.0);
  return dist(rng_);
}

PlantState Plant::make_initial(const Eigen::Vector2d& com, const Eigen::Vector2d& vel,
                               StanceSide side) {
  PlantState s;
  s.com = com;
  s.com_vel = vel;
  s.cop_actual = Eigen::Vector2d::Zero();
  s.stance_world = Eigen::Vector2d::Zero();
  s.stance_side = side;
  s.tau = 0.0;
  s.domain_index = 0;
  s.time = 0.0;
  s.early_impact_phase = sample_early_impact_phase();
  return s;
}

PlantState Plant::step(const PlantState& state, const Eigen::Vector2d& u_cop_command,
                       double step_duration, std::span<const Perturbation> perturbations) const {
  const double dt = config_.dt;
  const Eigen::Vector2d cmd_raw = u_cop_command;
  const Eigen::Vector2d cmd = clamp_to_box(cmd_raw, config_.cop_halfwidth);
  if ((cmd - cmd_raw).norm() > 1e-12) {
    log::debug("CoP command clamped at t=%.4f", state.time);
  }

  // Perturbation acceleration, averaged over the overlap of this tick with
  // the pulse window so the imparted delta-v is exact regardless of
  // alignment.
  Eigen::Vector2d a_pert = Eigen::Vector2d::Zero();
  for (const auto& pert : perturbations) {
    const double t0 = std::max(state.time, pert.time);
    const double t1 = std::min(state.time + dt, pert.time + pert.duration);
    if (t1 > t0) {
      a_pert += pert.delta_v * ((t1 - t0) / (pert.duration * dt));
    }
  }

  Eigen::Vector2d a_noise = Eigen::Vector2d::Zero();
  if (config_.process_noise_std > 0.0) {
    const double scale = config_.process_noise_std / std::sqrt(dt);
    a_noise << scale * gauss_(rng_), scale * gauss_(rng_);
  }

  const double tau0 = state.tau;
  const double dtau = dt / step_duration;
  const double z0 = config_.lip.z0;
  const double wobble = config_.height_wobble_amplitude;
  const double g = config_.lip.g;
  const double lag = config_.cop_lag_time_constant;

  // RK4 over (com, vel, cop); the CoP lag is part of the continuous state.
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  Vec6 xs;
  xs << state.com, state.com_vel, state.cop_actual;
  auto deriv = [&](const Vec6& v, double local_t) {
    const double tau = tau0 + local_t / step_duration;
    const double z = z0 + wobble * std::sin(2.0 * M_PI * tau);
    Vec6 d;
    const Eigen::Vector2d com = v.segment<2>(0);
    const Eigen::Vector2d vel = v.segment<2>(2);
    const Eigen::Vector2d cop = v.segment<2>(4);
    d.segment<2>(0) = vel;
    d.segment<2>(2) = (g / z) * (com - cop) + a_noise + a_pert;
    d.segment<2>(4) = lag > 0.0 ? ((cmd - cop) / lag).eval() : Eigen::Vector2d::Zero();
    return d;
  };
  if (lag <= 0.0) xs.segment<2>(4) = cmd;
  const Vec6 k1 = deriv(xs, 0.0);
  const Vec6 k2 = deriv(xs + 0.5 * dt * k1, 0.5 * dt);
  const Vec6 k3 = deriv(xs + 0.5 * dt * k2, 0.5 * dt);
  const Vec6 k4 = deriv(xs + dt * k3, dt);
  Vec6 xn = xs + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  PlantState out = state;
  out.com = xn.segment<2>(0);
  out.com_vel = xn.segment<2>(2);
  out.cop_actual = clamp_to_box(xn.segment<2>(4), config_.cop_halfwidth);
  out.tau = std::min(tau0 + dtau, 1.0);
  out.time = state.time + dt;
  return out;
}

GuardEvent Plant::check_guard(const PlantState& state) const {
  if (state.tau >= 1.0) return GuardEvent::Impact;
  if (state.tau >= config_.min_phase_threshold && state.tau >= state.early_impact_phase) {
    return GuardEvent::Impact;
  }
  return GuardEvent::None;
}

PlantState Plant::apply_impact(const PlantState& state, const Eigen::Vector2d& lambda) {
  PlantState out = state;
  out.stance_world += lambda;
  out.com -= lambda;
  out.stance_side = other_side(state.stance_side);
  out.tau = 0.0;
  out.domain_index = state.domain_index + 1;
  out.early_impact_phase = sample_early_impact_phase();
  return out;
}

bool Plant::is_fallen(const PlantState& state) const {
  return state.com.cwiseAbs().maxCoeff() > config_.fall_position_limit ||
         state.com_vel.cwiseAbs().maxCoeff() > config_.fall_velocity_limit;
}

}  // namespace hddpc
