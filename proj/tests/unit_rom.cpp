#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "hddpc/rom.hpp"

using namespace hddpc;

namespace {

// RK4 integration of the pendulum as an independent oracle for the closed
// forms.
HlipState rk4_flow(const HlipState& x0, double t_end, const LipParams& params, double dt) {
  double p = x0.p, v = x0.v;
  const double w2 = params.g / params.z0;
  auto acc = [&](double pp) { return w2 * pp; };
  int steps = static_cast<int>(std::round(t_end / dt));
  for (int i = 0; i < steps; ++i) {
    const double k1p = v, k1v = acc(p);
    const double k2p = v + 0.5 * dt * k1v, k2v = acc(p + 0.5 * dt * k1p);
    const double k3p = v + 0.5 * dt * k2v, k3v = acc(p + 0.5 * dt * k2p);
    const double k4p = v + dt * k3v, k4v = acc(p + dt * k3p);
    p += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    v += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return {p, v};
}

}  // namespace

TEST_CASE("lip_accel basics") {
  LipParams params{0.9, 9.81, 1.0, 0.0};
  CHECK(lip_accel(0.25, 0.25, params) == doctest::Approx(0.0));
  CHECK(lip_accel(0.1, 0.0, params) == doctest::Approx(9.81 / 0.9 * 0.1).epsilon(1e-12));
  CHECK(lip_accel(-0.1, 0.0, params) < 0.0);
}

TEST_CASE("hlip_flow identity at t=0 and equilibrium") {
  LipParams params{0.9, 9.81, 1.0, 0.0};
  HlipState x{0.04, -0.3};
  HlipState y = hlip_flow(x, 0.0, params);
  CHECK(y.p == doctest::Approx(x.p));
  CHECK(y.v == doctest::Approx(x.v));
  HlipState zero = hlip_flow({0.0, 0.0}, 1.7, params);
  CHECK(zero.p == doctest::Approx(0.0));
  CHECK(zero.v == doctest::Approx(0.0));
}

TEST_CASE("hlip_flow matches RK4 oracle") {
  LipParams params{0.9, 9.81, 1.0, 0.0};
  HlipState x{0.05, 0.0};
  HlipState closed = hlip_flow(x, 0.4, params);
  HlipState numeric = rk4_flow(x, 0.4, params, 1e-5);
  CHECK(closed.p == doctest::Approx(numeric.p).epsilon(1e-8));
  CHECK(closed.v == doctest::Approx(numeric.v).epsilon(1e-8));
}

TEST_CASE("hlip_flow semigroup and first integral") {
  LipParams params{0.8, 9.81, 1.0, 0.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  const double w2 = params.g / params.z0;
  for (int i = 0; i < 25; ++i) {
    HlipState x{dist(rng), dist(rng)};
    const double t1 = 0.3 * (dist(rng) + 0.6), t2 = 0.4 * (dist(rng) + 0.6);
    HlipState a = hlip_flow(hlip_flow(x, t1, params), t2, params);
    HlipState b = hlip_flow(x, t1 + t2, params);
    CHECK(a.p == doctest::Approx(b.p).epsilon(1e-12));
    CHECK(a.v == doctest::Approx(b.v).epsilon(1e-12));
    const double e0 = w2 * x.p * x.p - x.v * x.v;
    const double e1 = w2 * a.p * a.p - a.v * a.v;
    CHECK(e1 == doctest::Approx(e0).epsilon(1e-10));
  }
}

TEST_CASE("hlip_reset algebra") {
  LipParams params{0.9, 9.81, 1.0, 0.0};
  HlipState id = hlip_reset({0.07, 0.2}, 0.0, params);
  CHECK(id.p == doctest::Approx(0.07));
  CHECK(id.v == doctest::Approx(0.2));

  LipParams with_dsp{0.9, 9.81, 1.0, 0.1};
  HlipState r = hlip_reset({0.1, 0.5}, 0.2, with_dsp);
  CHECK(r.p == doctest::Approx(-0.05).epsilon(1e-14));
  CHECK(r.v == doctest::Approx(0.5));
}

TEST_CASE("hlip_s2s zero-time limit") {
  LipParams params{0.9, 9.81, 1e-9, 0.0};
  S2SMatrices s2s = hlip_s2s(params);
  CHECK((s2s.A - Eigen::Matrix2d::Identity()).norm() < 1e-6);
  CHECK(s2s.B(0) == doctest::Approx(-1.0));
  CHECK(s2s.B(1) == doctest::Approx(0.0));
}

TEST_CASE("hlip_s2s equals composition of flow and reset") {
  LipParams params{0.9, 9.81, 0.9, 0.1};
  S2SMatrices s2s = hlip_s2s(params);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-0.4, 0.4);
  for (int i = 0; i < 20; ++i) {
    HlipState x{dist(rng), dist(rng)};
    const double lambda = dist(rng);
    HlipState direct = hlip_reset(hlip_flow(x, params.t_ssp, params), lambda, params);
    Eigen::Vector2d via = s2s.A * Eigen::Vector2d(x.p, x.v) + s2s.B * lambda;
    CHECK(via(0) == doctest::Approx(direct.p).epsilon(1e-13));
    CHECK(via(1) == doctest::Approx(direct.v).epsilon(1e-13));
  }
}

TEST_CASE("hlip_s2s matches finite-difference Jacobian") {
  LipParams params{0.9, 9.81, 0.9, 0.1};
  S2SMatrices s2s = hlip_s2s(params);
  const double h = 1e-7;
  auto map = [&](double p, double v, double lambda) {
    return hlip_reset(hlip_flow({p, v}, params.t_ssp, params), lambda, params);
  };
  HlipState base = map(0.0, 0.0, 0.0);
  CHECK(base.p == doctest::Approx(0.0));
  Eigen::Matrix2d a_fd;
  a_fd(0, 0) = (map(h, 0, 0).p - map(-h, 0, 0).p) / (2 * h);
  a_fd(1, 0) = (map(h, 0, 0).v - map(-h, 0, 0).v) / (2 * h);
  a_fd(0, 1) = (map(0, h, 0).p - map(0, -h, 0).p) / (2 * h);
  a_fd(1, 1) = (map(0, h, 0).v - map(0, -h, 0).v) / (2 * h);
  Eigen::Vector2d b_fd;
  b_fd(0) = (map(0, 0, h).p - map(0, 0, -h).p) / (2 * h);
  b_fd(1) = (map(0, 0, h).v - map(0, 0, -h).v) / (2 * h);
  CHECK((s2s.A - a_fd).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((s2s.B - b_fd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("hlip_s2s has an unstable eigenvalue") {
  LipParams params{0.9, 9.81, 0.9, 0.0};
  S2SMatrices s2s = hlip_s2s(params);
  Eigen::EigenSolver<Eigen::Matrix2d> es(s2s.A);
  const double max_ev = es.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(max_ev > 1.0);
}

TEST_CASE("periodic orbit is a fixed point with the right speed") {
  LipParams params{0.9, 9.81, 0.9, 0.1};
  for (double v_des : {0.0, 0.1, 0.25, -0.15}) {
    PeriodicOrbit orbit = hlip_periodic_orbit(v_des, params);
    CHECK(orbit.step_size ==
          doctest::Approx(v_des * (params.t_ssp + params.t_dsp)).epsilon(1e-14));
    HlipState next =
        hlip_reset(hlip_flow(orbit.start, params.t_ssp, params), orbit.step_size, params);
    CHECK(std::abs(next.p - orbit.start.p) < 1e-10);
    CHECK(std::abs(next.v - orbit.start.v) < 1e-10);
    // Fixed-point residual through the linear map as well.
    S2SMatrices s2s = hlip_s2s(params);
    Eigen::Vector2d x(orbit.start.p, orbit.start.v);
    Eigen::Vector2d resid = s2s.A * x + s2s.B * orbit.step_size - x;
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("period-2 orbit alternates and mirrors for symmetric widths") {
  LipParams params{0.9, 9.81, 1.0, 0.0};
  const double width = 0.2;
  Period2Orbit orbit = hlip_period2_orbit(-width, width, params);
  S2SMatrices s2s = hlip_s2s(params);
  Eigen::Vector2d xa(orbit.start_a.p, orbit.start_a.v);
  Eigen::Vector2d xb(orbit.start_b.p, orbit.start_b.v);
  CHECK(((s2s.A * xa + s2s.B * -width) - xb).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(((s2s.A * xb + s2s.B * width) - xa).cwiseAbs().maxCoeff() < 1e-10);
  // Symmetric gait: the two domain trajectories are mirror images.
  CHECK(xa(0) == doctest::Approx(-xb(0)).epsilon(1e-10));
  CHECK(xa(1) == doctest::Approx(-xb(1)).epsilon(1e-10));
}

TEST_CASE("lateral sign flip on relabeled synthetic data") {
  // Flowing the period-2 orbit through consecutive domains and relabeling
  // stance gives y_d(tau) = -y_{d+1}(tau).
  LipParams params{0.9, 9.81, 1.0, 0.0};
  const double width = 0.2;
  Period2Orbit orbit = hlip_period2_orbit(-width, width, params);
  for (int k = 0; k <= 10; ++k) {
    const double t = params.t_ssp * k / 10.0;
    HlipState a = hlip_flow(orbit.start_a, t, params);
    HlipState b = hlip_flow(orbit.start_b, t, params);
    CHECK(a.p == doctest::Approx(-b.p).epsilon(1e-6));
  }
}

TEST_CASE("frame_transform basics and composition") {
  std::vector<Eigen::Vector2d> traj{{0.10, 0.00}, {0.12, -0.05}};
  auto same = frame_transform(traj, Eigen::Vector2d::Zero());
  CHECK(same[0] == traj[0]);
  auto shifted = frame_transform({{0.10, 0.00}}, Eigen::Vector2d(0.15, -0.20));
  CHECK(shifted[0](0) == doctest::Approx(-0.05).epsilon(1e-14));
  CHECK(shifted[0](1) == doctest::Approx(0.20).epsilon(1e-14));
  Eigen::Vector2d l1(0.03, -0.1), l2(-0.07, 0.2);
  auto twice = frame_transform(frame_transform(traj, l1), l2);
  auto once = frame_transform(traj, l1 + l2);
  for (size_t i = 0; i < traj.size(); ++i) {
    CHECK((twice[i] - once[i]).norm() < 1e-15);
  }
}
