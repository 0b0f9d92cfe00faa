#pragma once

#include <vector>

#include <Eigen/Core>

// Closed-form reduced-order walking models: the constant-height pendulum
// (LIP), the hybrid LIP with its flow / reset / step-to-step maps, periodic
// orbits, and the stance-frame translation applied at domain transitions.

namespace hddpc {

struct LipParams {
  double z0 = 0.9;     // CoM height, m
  double g = 9.81;     // gravity, m/s^2
  double t_ssp = 1.0;  // single-support duration, s
  double t_dsp = 0.0;  // double-support duration, s

  double omega() const { return std::sqrt(g / z0); }
};

struct HlipState {
  double p = 0.0;  // CoM position relative to stance foot, m
  double v = 0.0;  // CoM velocity, m/s
};

struct S2SMatrices {
  Eigen::Matrix2d A;
  Eigen::Vector2d B;
};

// Constant-height pendulum acceleration given CoM and CoP positions.
double lip_accel(double p, double u_cop, const LipParams& params);

// SSP flow of the H-LIP over time t (pendulum over the stance point).
HlipState hlip_flow(const HlipState& state, double t, const LipParams& params);

// Reset map across the step transition with step size lambda.
HlipState hlip_reset(const HlipState& state, double lambda, const LipParams& params);

// Linear step-to-step map x_{k+1} = A x_k + B lambda_k where x_k is the
// post-impact (start-of-domain) state; A composes flow over t_ssp with the
// reset, B carries the step size through the reset.
S2SMatrices hlip_s2s(const LipParams& params);

struct PeriodicOrbit {
  HlipState start;      // post-impact fixed point
  double step_size;     // lambda*
};

// Period-1 orbit whose average horizontal speed is v_des.
PeriodicOrbit hlip_periodic_orbit(double v_des, const LipParams& params);

struct Period2Orbit {
  HlipState start_a;  // post-impact state of the domain entered by lambda_b
  HlipState start_b;  // post-impact state of the domain entered by lambda_a
};

// Period-2 orbit of the S2S map under alternating step sizes
// (lambda_a then lambda_b). start_a is the state at the start of the domain
// that ends with the lambda_a transition.
Period2Orbit hlip_period2_orbit(double lambda_a, double lambda_b, const LipParams& params);

// Translate a position trajectory into the next stance frame (subtract lambda).
std::vector<Eigen::Vector2d> frame_transform(const std::vector<Eigen::Vector2d>& traj,
                                             const Eigen::Vector2d& lambda);

}  // namespace hddpc
