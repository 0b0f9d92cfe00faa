#include "hddpc/rom.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "hddpc/errors.hpp"

namespace hddpc {

double lip_accel(double p, double u_cop, const LipParams& params) {
  return params.g / params.z0 * (p - u_cop);
}

HlipState hlip_flow(const HlipState& state, double t, const LipParams& params) {
  const double w = params.omega();
  const double ch = std::cosh(w * t);
  const double sh = std::sinh(w * t);
  HlipState out;
  out.p = state.p * ch + state.v / w * sh;
  out.v = state.p * w * sh + state.v * ch;
  return out;
}

HlipState hlip_reset(const HlipState& state, double lambda, const LipParams& params) {
  HlipState out;
  out.v = state.v;
  out.p = state.p + state.v * params.t_dsp - lambda;
  return out;
}

S2SMatrices hlip_s2s(const LipParams& params) {
  const double w = params.omega();
  const double ch = std::cosh(w * params.t_ssp);
  const double sh = std::sinh(w * params.t_ssp);
  Eigen::Matrix2d flow;
  flow << ch, sh / w, w * sh, ch;
  Eigen::Matrix2d reset;
  reset << 1.0, params.t_dsp, 0.0, 1.0;
  S2SMatrices out;
  out.A = reset * flow;
  out.B << -1.0, 0.0;
  return out;
}

PeriodicOrbit hlip_periodic_orbit(double v_des, const LipParams& params) {
  const S2SMatrices s2s = hlip_s2s(params);
  const double lambda = v_des * (params.t_ssp + params.t_dsp);
  const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() - s2s.A;
  if (std::abs(m.determinant()) < 1e-12) {
    throw Error(ErrorKind::SingularOrbit, "I - A is singular");
  }
  const Eigen::Vector2d x = m.partialPivLu().solve(s2s.B * lambda);
  PeriodicOrbit orbit;
  orbit.start = HlipState{x(0), x(1)};
  orbit.step_size = lambda;
  return orbit;
}

Period2Orbit hlip_period2_orbit(double lambda_a, double lambda_b, const LipParams& params) {
  const S2SMatrices s2s = hlip_s2s(params);
  const Eigen::Matrix2d a2 = s2s.A * s2s.A;
  const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() - a2;
  if (std::abs(m.determinant()) < 1e-12) {
    throw Error(ErrorKind::SingularOrbit, "I - A^2 is singular");
  }
  // x_a = A x_b + B lambda_b, x_b = A x_a + B lambda_a
  const Eigen::Vector2d xa = m.partialPivLu().solve(s2s.A * s2s.B * lambda_a + s2s.B * lambda_b);
  const Eigen::Vector2d xb = s2s.A * xa + s2s.B * lambda_a;
  Period2Orbit orbit;
  orbit.start_a = HlipState{xa(0), xa(1)};
  orbit.start_b = HlipState{xb(0), xb(1)};
  return orbit;
}

std::vector<Eigen::Vector2d> frame_transform(const std::vector<Eigen::Vector2d>& traj,
                                             const Eigen::Vector2d& lambda) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(traj.size());
  for (const auto& p : traj) out.push_back(p - lambda);
  return out;
}

}  // namespace hddpc
