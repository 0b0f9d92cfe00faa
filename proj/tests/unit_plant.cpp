#include <doctest.h>

#include "hddpc/plant.hpp"
#include "hddpc/rom.hpp"

using namespace hddpc;

namespace {

PlantConfig ideal_config() {
  PlantConfig cfg;
  cfg.lip = LipParams{0.9, 9.81, 0.9, 0.0};
  cfg.height_wobble_amplitude = 0.0;
  cfg.cop_lag_time_constant = 0.0;
  cfg.process_noise_std = 0.0;
  cfg.cop_halfwidth = Eigen::Vector2d(0.2, 0.2);
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("balanced command keeps velocity constant") {
  PlantConfig cfg = ideal_config();
  Plant plant(cfg);
  // Stationary pendulum balanced over its CoP: exactly zero acceleration.
  PlantState rest = plant.make_initial({0.05, -0.02}, {0.0, 0.0}, StanceSide::Left);
  for (int i = 0; i < 200; ++i) rest = plant.step(rest, rest.com, 0.9, {});
  CHECK(rest.com_vel.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rest.com(0) == doctest::Approx(0.05).epsilon(1e-14));

  // Moving CoM with the command re-balanced each tick: drift is bounded by
  // the zero-order hold of the command, one tick of lag at most.
  PlantState s = plant.make_initial({0.05, -0.02}, {0.3, 0.1}, StanceSide::Left);
  for (int i = 0; i < 200; ++i) s = plant.step(s, s.com, 0.9, {});
  CHECK(s.com_vel(0) == doctest::Approx(0.3).epsilon(2e-3));
  CHECK(s.com_vel(1) == doctest::Approx(0.1).epsilon(2e-3));
}

TEST_CASE("ideal plant with zero CoP matches the closed-form flow") {
  PlantConfig cfg = ideal_config();
  Plant plant(cfg);
  HlipState x0{0.05, 0.0};
  HlipState y0{-0.03, 0.15};
  PlantState s = plant.make_initial({x0.p, y0.p}, {x0.v, y0.v}, StanceSide::Left);
  const int steps = 900;
  for (int i = 0; i < steps; ++i) {
    s = plant.step(s, Eigen::Vector2d::Zero(), 0.9, {});
  }
  const double t = steps * cfg.dt;
  HlipState xe = hlip_flow(x0, t, cfg.lip);
  HlipState ye = hlip_flow(y0, t, cfg.lip);
  CHECK(s.com(0) == doctest::Approx(xe.p).epsilon(1e-6));
  CHECK(s.com_vel(0) == doctest::Approx(xe.v).epsilon(1e-6));
  CHECK(s.com(1) == doctest::Approx(ye.p).epsilon(1e-6));
  CHECK(s.com_vel(1) == doctest::Approx(ye.v).epsilon(1e-6));
}

TEST_CASE("perturbation imparts the exact delta-v") {
  PlantConfig cfg = ideal_config();
  cfg.lip.z0 = 1e12;  // freeze the pendulum term
  Plant plant(cfg);
  PlantState s = plant.make_initial({0.0, 0.0}, {0.0, 0.0}, StanceSide::Left);
  Perturbation pert;
  pert.time = 0.0035;  // deliberately unaligned with the tick grid
  pert.duration = 0.01;
  pert.delta_v = Eigen::Vector2d(0.3, -0.1);
  std::vector<Perturbation> perts{pert};
  for (int i = 0; i < 30; ++i) {
    s = plant.step(s, Eigen::Vector2d::Zero(), 0.9, perts);
  }
  CHECK(s.com_vel(0) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(s.com_vel(1) == doctest::Approx(-0.1).epsilon(1e-9));
}

TEST_CASE("guard logic") {
  PlantConfig cfg = ideal_config();
  cfg.min_phase_threshold = 0.3;
  Plant plant(cfg);
  PlantState s = plant.make_initial({0, 0}, {0, 0}, StanceSide::Left);
  s.tau = 0.5;
  CHECK(plant.check_guard(s) == GuardEvent::None);
  s.tau = 0.99;
  CHECK(plant.check_guard(s) == GuardEvent::None);
  s.tau = 1.0;
  CHECK(plant.check_guard(s) == GuardEvent::Impact);
}

TEST_CASE("early impact jitter fires between threshold and one") {
  PlantConfig cfg = ideal_config();
  cfg.early_impact_phase_jitter = 0.2;
  cfg.min_phase_threshold = 0.3;
  Plant plant(cfg);
  PlantState s = plant.make_initial({0, 0}, {0, 0}, StanceSide::Left);
  CHECK(s.early_impact_phase >= 0.8);
  CHECK(s.early_impact_phase <= 1.0);
  s.tau = s.early_impact_phase;
  CHECK(plant.check_guard(s) == GuardEvent::Impact);
  s.tau = s.early_impact_phase - 0.01;
  CHECK(plant.check_guard(s) == GuardEvent::None);
}

TEST_CASE("impact relabels stance and keeps world CoM continuous") {
  PlantConfig cfg = ideal_config();
  Plant plant(cfg);
  PlantState s = plant.make_initial({0.10, 0.05}, {0.4, -0.2}, StanceSide::Left);
  s.tau = 1.0;
  const Eigen::Vector2d world_before = s.stance_world + s.com;
  Eigen::Vector2d lambda(0.15, -0.20);
  PlantState s2 = plant.apply_impact(s, lambda);
  CHECK(s2.com(0) == doctest::Approx(-0.05).epsilon(1e-14));
  CHECK(s2.com(1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(s2.stance_side == StanceSide::Right);
  CHECK(s2.tau == 0.0);
  CHECK(s2.domain_index == 1);
  const Eigen::Vector2d world_after = s2.stance_world + s2.com;
  CHECK((world_after - world_before).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s2.com_vel - s.com_vel).cwiseAbs().maxCoeff() == 0.0);

  PlantState s3 = plant.apply_impact(s, Eigen::Vector2d::Zero());
  CHECK((s3.com - s.com).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s3.stance_side == StanceSide::Right);
}

TEST_CASE("fall detection") {
  PlantConfig cfg = ideal_config();
  Plant plant(cfg);
  PlantState s = plant.make_initial({10.0, 0.0}, {0.0, 0.0}, StanceSide::Left);
  CHECK(plant.is_fallen(s));
  PlantConfig loose = ideal_config();
  loose.fall_position_limit = 1e18;
  loose.fall_velocity_limit = 1e18;
  Plant plant2(loose);
  CHECK_FALSE(plant2.is_fallen(s));
}

TEST_CASE("orbit walking under CoP tracking never trips the fall detector") {
  // The open-loop step-to-step map has an unstable eigenvalue, so the orbit
  // is tracked with the same CoP feedback the data-collection policy uses.
  PlantConfig cfg = ideal_config();
  cfg.lip.t_ssp = 1.0;
  Plant plant(cfg);
  LipParams lip = cfg.lip;
  PeriodicOrbit orbit = hlip_periodic_orbit(0.1, lip);
  Period2Orbit lateral = hlip_period2_orbit(-0.2, 0.2, lip);
  PlantState s = plant.make_initial({orbit.start.p, lateral.start_a.p},
                                    {orbit.start.v, lateral.start_a.v}, StanceSide::Left);
  const double kp = 40.0, kd = 9.0;
  double lateral_sign = 1.0;
  bool fell = false;
  for (double t = 0.0; t < 10.0 && !fell; t += cfg.dt) {
    const double tloc = s.tau * lip.t_ssp;
    HlipState cx = hlip_flow(orbit.start, tloc, lip);
    HlipState cy = hlip_flow(lateral_sign > 0 ? lateral.start_a : lateral.start_b, tloc, lip);
    Eigen::Vector2d c_des(cx.p, cy.p), v_des(cx.v, cy.v);
    Eigen::Vector2d a_des(lip_accel(cx.p, 0.0, lip), lip_accel(cy.p, 0.0, lip));
    Eigen::Vector2d a_cmd = a_des + kp * (c_des - s.com) + kd * (v_des - s.com_vel);
    Eigen::Vector2d u = s.com - (lip.z0 / lip.g) * a_cmd;
    s = plant.step(s, u, lip.t_ssp, {});
    fell = plant.is_fallen(s);
    if (plant.check_guard(s) == GuardEvent::Impact) {
      s = plant.apply_impact(s, Eigen::Vector2d(orbit.step_size, -0.2 * lateral_sign));
      lateral_sign = -lateral_sign;
    }
  }
  CHECK_FALSE(fell);
}

TEST_CASE("determinism: same seed gives bit-identical trajectories") {
  PlantConfig cfg = ideal_config();
  cfg.process_noise_std = 0.05;
  cfg.cop_lag_time_constant = 0.03;
  cfg.height_wobble_amplitude = 0.02;
  cfg.seed = 42;
  auto run = [&]() {
    Plant plant(cfg);
    PlantState s = plant.make_initial({0.02, 0.0}, {0.1, 0.0}, StanceSide::Left);
    std::vector<double> trace;
    for (int i = 0; i < 500; ++i) {
      s = plant.step(s, Eigen::Vector2d(0.01, -0.01), 1.0, {});
      trace.push_back(s.com(0));
      trace.push_back(s.com_vel(1));
    }
    return trace;
  };
  auto a = run();
  auto b = run();
  CHECK(a == b);
}

TEST_CASE("cop stays inside the polygon box") {
  PlantConfig cfg = ideal_config();
  cfg.cop_lag_time_constant = 0.05;
  cfg.cop_halfwidth = Eigen::Vector2d(0.05, 0.03);
  Plant plant(cfg);
  PlantState s = plant.make_initial({0.0, 0.0}, {0.0, 0.0}, StanceSide::Left);
  for (int i = 0; i < 300; ++i) {
    s = plant.step(s, Eigen::Vector2d(10.0, -10.0), 1.0, {});
    CHECK(std::abs(s.cop_actual(0)) <= 0.05 + 1e-12);
    CHECK(std::abs(s.cop_actual(1)) <= 0.03 + 1e-12);
  }
}
