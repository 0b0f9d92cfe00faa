#include "hddpc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "hddpc/bezier.hpp"
#include "hddpc/errors.hpp"
#include "hddpc/log.hpp"

namespace hddpc {

const char* to_string(Arm arm) {
  switch (arm) {
    case Arm::Nominal: return "nominal";
    case Arm::Ddpc: return "ddpc";
    case Arm::Hddpc: return "hddpc";
  }
  return "unknown";
}

std::optional<Arm> arm_from_string(const std::string& s) {
  if (s == "nominal") return Arm::Nominal;
  if (s == "ddpc") return Arm::Ddpc;
  if (s == "hddpc") return Arm::Hddpc;
  return std::nullopt;
}

GaitSchedule make_collection_schedule(const CollectionConfig& collection) {
  GaitSchedule schedule;
  const int steps = 2 * collection.cycles + 1;
  for (int k = 0; k < steps; ++k) {
    const size_t i = static_cast<size_t>(k);
    GaitScheduleEntry e;
    e.side = k % 2 == 0 ? StanceSide::Left : StanceSide::Right;
    e.duration = collection.step_durations[i % collection.step_durations.size()];
    // The width entering a left-stance step is positive (foot placed to the
    // left), negative entering right stance.
    const double width = collection.step_widths[i % collection.step_widths.size()];
    e.step_length =
        Eigen::Vector2d(collection.step_lengths[i % collection.step_lengths.size()],
                        e.side == StanceSide::Left ? width : -width);
    schedule.entries.push_back(e);
  }
  return schedule;
}

namespace {

struct TrackTarget {
  Eigen::Vector2d pos, vel, acc;
};

// Per-axis orbit states for a scheduled step.
struct StepOrbit {
  HlipState x, y;
};

StepOrbit step_orbit(double v, double width, double t_step, StanceSide side,
                     const LipParams& lip) {
  LipParams local = lip;
  local.t_ssp = t_step;
  PeriodicOrbit fwd = hlip_periodic_orbit(v, local);
  Period2Orbit lat = hlip_period2_orbit(-width, width, local);
  StepOrbit orbit;
  orbit.x = fwd.start;
  orbit.y = side == StanceSide::Left ? lat.start_a : lat.start_b;
  return orbit;
}

TrackTarget orbit_target(const StepOrbit& orbit, double t, const LipParams& lip) {
  HlipState fx = hlip_flow(orbit.x, t, lip);
  HlipState fy = hlip_flow(orbit.y, t, lip);
  TrackTarget target;
  target.pos = Eigen::Vector2d(fx.p, fy.p);
  target.vel = Eigen::Vector2d(fx.v, fy.v);
  target.acc = Eigen::Vector2d(lip_accel(fx.p, 0.0, lip), lip_accel(fy.p, 0.0, lip));
  return target;
}

Eigen::Vector2d cop_command(const TrackTarget& target, const PlantState& s,
                            const TrackerConfig& tracker, const LipParams& lip) {
  const Eigen::Vector2d a_cmd = target.acc + tracker.kp * (target.pos - s.com) +
                                tracker.kd * (target.vel - s.com_vel);
  return s.com - (lip.z0 / lip.g) * a_cmd;
}

Eigen::Vector2d clamp_box(const Eigen::Vector2d& v, const Eigen::Vector2d& halfwidth) {
  return v.cwiseMax(-halfwidth).cwiseMin(halfwidth);
}

// Per-step tick buffer resampled onto the phase grid over the realized
// duration.
struct StepBuffer {
  std::vector<double> t;
  std::vector<Eigen::Vector2d> mu, eta;

  void clear() {
    t.clear();
    mu.clear();
    eta.clear();
  }

  void sample(double t_query, Eigen::Vector2d& mu_out, Eigen::Vector2d& eta_out) const {
    auto it = std::lower_bound(t.begin(), t.end(), t_query);
    if (it == t.begin()) {
      mu_out = mu.front();
      eta_out = eta.front();
      return;
    }
    if (it == t.end()) {
      mu_out = mu.back();
      eta_out = eta.back();
      return;
    }
    const size_t i1 = static_cast<size_t>(it - t.begin());
    const size_t i0 = i1 - 1;
    const double w = (t_query - t[i0]) / (t[i1] - t[i0]);
    mu_out = (1.0 - w) * mu[i0] + w * mu[i1];
    eta_out = (1.0 - w) * eta[i0] + w * eta[i1];
  }
};

}  // namespace

Dataset collect_dataset(const ToolConfig& config) {
  const LipParams& lip = config.lip;
  const GaitSchedule schedule = make_collection_schedule(config.collection);
  const int n_fine = config.planner.samples_per_step;

  PlantConfig plant_cfg = config.plant;
  plant_cfg.lip = lip;
  plant_cfg.seed = config.seed;
  Plant plant(plant_cfg);

  Dataset data;
  data.delta_tau = 1.0 / n_fine;

  const GaitScheduleEntry& first = schedule.entries.front();
  StepOrbit orbit = step_orbit(first.step_length(0) / first.duration,
                               std::abs(first.step_length(1)), first.duration, first.side, lip);
  PlantState s = plant.make_initial(Eigen::Vector2d(orbit.x.p, orbit.y.p),
                                    Eigen::Vector2d(orbit.x.v, orbit.y.v), first.side);

  StepBuffer buffer;
  size_t step_idx = 0;
  double t_in_domain = 0.0;
  Eigen::Vector2d entering_lambda = Eigen::Vector2d::Zero();
  while (step_idx < schedule.entries.size()) {
    const GaitScheduleEntry& entry = schedule.entries[step_idx];
    const TrackTarget target = orbit_target(orbit, t_in_domain, lip);
    const Eigen::Vector2d u_cmd =
        clamp_box(cop_command(target, s, config.tracker, lip), plant_cfg.cop_halfwidth);
    buffer.t.push_back(t_in_domain);
    buffer.mu.push_back(u_cmd);
    buffer.eta.push_back(s.com);

    s = plant.step(s, u_cmd, entry.duration, {});
    t_in_domain += plant_cfg.dt;
    if (plant.is_fallen(s)) {
      throw Error(ErrorKind::CollectionFellOver,
                  "plant fell during collection at t=" + std::to_string(s.time));
    }
    if (plant.check_guard(s) != GuardEvent::Impact) continue;

    // Close out this step: resample the buffer on the phase grid over the
    // realized duration.
    const double t_real = t_in_domain;
    Trajectory traj;
    traj.stance_side = entry.side;
    traj.duration = t_real;
    traj.step_length = entering_lambda;
    traj.inputs.resize(2, n_fine);
    traj.outputs.resize(2, n_fine);
    traj.phase_grid.resize(static_cast<size_t>(n_fine));
    for (int k = 0; k < n_fine; ++k) {
      Eigen::Vector2d mu_k, eta_k;
      buffer.sample(t_real * k / n_fine, mu_k, eta_k);
      traj.inputs.col(k) = mu_k;
      traj.outputs.col(k) = eta_k;
      traj.phase_grid[static_cast<size_t>(k)] = static_cast<double>(k) / n_fine;
    }
    if (entry.side == StanceSide::Left) {
      data.stance_left.push_back(traj);
    } else {
      data.stance_right.push_back(traj);
    }

    const Eigen::Vector2d pre_impact = s.com;
    ++step_idx;
    if (step_idx >= schedule.entries.size()) break;
    const GaitScheduleEntry& next = schedule.entries[step_idx];

    // Position-deadbeat placement toward the next scheduled orbit: the
    // schedule's step parameters shape the targets while the realized
    // placement absorbs the tracking error (and is what gets recorded).
    StepOrbit next_orbit = step_orbit(next.step_length(0) / next.duration,
                                      std::abs(next.step_length(1)), next.duration, next.side, lip);
    const double omega = lip.omega();
    const double ch = std::cosh(omega * next.duration);
    const double sh = std::sinh(omega * next.duration);
    const double x_target = hlip_flow(next_orbit.x, next.duration, lip).p;
    const double y_target = hlip_flow(next_orbit.y, next.duration, lip).p;
    Eigen::Vector2d lambda;
    lambda(0) = pre_impact(0) - (x_target - sh / omega * s.com_vel(0)) / ch;
    lambda(1) = pre_impact(1) - (y_target - sh / omega * s.com_vel(1)) / ch;

    S2SSample s2s;
    s2s.lambda = lambda;
    s2s.t_step = next.duration;
    s2s.pre_impact_com = pre_impact;
    if (entry.side == StanceSide::Left) {
      data.s2s_l2r.push_back(s2s);
    } else {
      data.s2s_r2l.push_back(s2s);
    }

    s = plant.apply_impact(s, lambda);
    orbit = next_orbit;
    entering_lambda = lambda;
    buffer.clear();
    t_in_domain = 0.0;
  }
  return data;
}

std::vector<Perturbation> make_perturbation_schedule(const PerturbationConfig& cfg,
                                                     double duration, unsigned long seed) {
  std::vector<Perturbation> out;
  if (!cfg.enabled) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> direction(0, 7);
  std::uniform_real_distribution<double> magnitude(cfg.magnitude_min, cfg.magnitude_max);
  for (double t = cfg.interval; t + cfg.pulse_duration < duration; t += cfg.interval) {
    const double angle = direction(rng) * M_PI / 4.0;
    const double mag = magnitude(rng);
    Perturbation p;
    p.time = t;
    p.duration = cfg.pulse_duration;
    p.delta_v = mag * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    out.push_back(p);
  }
  return out;
}

std::string schedule_hash(const std::vector<Perturbation>& perturbations) {
  Json arr = Json::array();
  for (const auto& p : perturbations) {
    arr.push_back({{"time", p.time},
                   {"duration", p.duration},
                   {"delta_v", {p.delta_v(0), p.delta_v(1)}}});
  }
  const std::string text = dump_deterministic(arr);
  // FNV-1a
  unsigned long long h = 1469598103934665603ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

RunLog run_closed_loop(Arm arm, const ToolConfig& config, const Dataset* dataset,
                       const std::vector<Perturbation>& perturbations, double duration,
                       unsigned long seed) {
  if (arm != Arm::Nominal && dataset == nullptr) {
    throw Error(ErrorKind::ConfigError, "planned arms require a dataset");
  }
  const LipParams& lip = config.lip;
  const int n_fine = config.planner.samples_per_step;
  OrbitReferences refs =
      extract_reference(config.gait, lip, n_fine, config.planner.samples_per_step_future);

  PlantConfig plant_cfg = config.plant;
  plant_cfg.lip = lip;
  plant_cfg.seed = seed;
  Plant plant(plant_cfg);
  PlantState s = plant.make_initial(refs.start_com(StanceSide::Left),
                                    refs.start_vel(StanceSide::Left), StanceSide::Left);

  std::unique_ptr<HddpcPlanner> planner;
  if (arm != Arm::Nominal) {
    HddpcConfig pcfg = config.planner;
    pcfg.pin_contact_schedule = arm == Arm::Ddpc;
    planner = std::make_unique<HddpcPlanner>(pcfg, lip, config.gait, plant_cfg.cop_halfwidth,
                                             *dataset, config.solver);
    planner->reset(StanceSide::Left);
  }

  RunLog logout;
  logout.arm = arm;
  logout.seed = seed;
  logout.duration = duration;
  logout.perturbations = perturbations;

  double t_cur = refs.t_nominal;
  std::optional<PlanResult> plan;
  int plan_domain = -1;
  int next_grid = 0;
  double last_replan = -1e18;
  StepBuffer buffer;
  double t_in_domain = 0.0;

  auto do_replan = [&](double tau) {
    if (!planner) return;
    PlannerState ps;
    ps.side = s.stance_side;
    ps.domain_index = s.domain_index;
    ps.tau = tau;
    ps.t_current = t_cur;
    ps.com = s.com;
    ps.com_vel = s.com_vel;
    ReplanRecord rec;
    rec.time = s.time;
    rec.domain = s.domain_index;
    rec.tau = tau;
    try {
      PlanResult result = planner->replan(ps);
      rec.alpha = result.alpha;
      rec.lambda = result.lambda;
      rec.t_step = result.t_step;
      rec.gamma_norm = result.gamma_norm();
      rec.sigma_norm = result.sigma_norm();
      rec.objective = result.objective;
      rec.iterations = result.diagnostics.iterations;
      rec.solve_ms = result.solve_ms;
      rec.accepted = true;
      plan = std::move(result);
      plan_domain = s.domain_index;
    } catch (const Error& e) {
      rec.accepted = false;
      log::warn("replan rejected at t=%.3f: %s", s.time, e.what());
    }
    last_replan = s.time;
    logout.replans.push_back(std::move(rec));
  };

  if (planner) do_replan(0.0);

  const double dt = plant_cfg.dt;
  const long long ticks = std::llround(duration / dt);
  for (long long tick = 0; tick < ticks; ++tick) {
    const double tau = s.tau;
    // Tracking target: the planned curve when one is valid for this domain,
    // otherwise the nominal orbit reference.
    TrackTarget target;
    bool tracking_plan = false;
    const int d_rel = plan ? s.domain_index - plan_domain : -1;
    if (plan && d_rel >= 0 && d_rel < static_cast<int>(plan->alpha.size())) {
      BezierCurve curve{plan->alpha[static_cast<size_t>(d_rel)], t_cur};
      const double t_eval = std::min(tau * t_cur, t_cur);
      target.pos = bez(t_eval, curve);
      target.vel = dbez(t_eval, curve);
      target.acc = ddbez(t_eval, curve);
      tracking_plan = true;
    } else {
      StepOrbit orbit{HlipState{refs.start_com(s.stance_side)(0), refs.start_vel(s.stance_side)(0)},
                      HlipState{refs.start_com(s.stance_side)(1), refs.start_vel(s.stance_side)(1)}};
      target = orbit_target(orbit, tau * refs.t_nominal, lip);
    }
    const Eigen::Vector2d u_cmd =
        clamp_box(cop_command(target, s, config.tracker, lip), plant_cfg.cop_halfwidth);

    if (planner) {
      buffer.t.push_back(t_in_domain);
      buffer.mu.push_back(u_cmd);
      buffer.eta.push_back(s.com);
      if (next_grid < n_fine && tau >= static_cast<double>(next_grid) / n_fine) {
        planner->record_sample(s.domain_index, next_grid, u_cmd, s.com);
        ++next_grid;
      }
    }

    TickRecord trec;
    trec.time = s.time;
    trec.com_world = s.stance_world + s.com;
    trec.com_vel = s.com_vel;
    trec.cop_world = s.stance_world + s.cop_actual;
    trec.stance_world = s.stance_world;
    trec.tau = tau;
    trec.domain = s.domain_index;
    trec.perturb_active = false;
    for (const auto& p : perturbations) {
      if (s.time >= p.time && s.time < p.time + p.duration) {
        trec.perturb_active = true;
        break;
      }
    }
    logout.ticks.push_back(trec);

    s = plant.step(s, u_cmd, t_cur, perturbations);
    t_in_domain += dt;
    if (plant.is_fallen(s)) {
      logout.outcome = Outcome::Fell;
      logout.fall_time = s.time;
      break;
    }
    if (plant.check_guard(s) == GuardEvent::Impact) {
      const Eigen::Vector2d pre_impact = s.com;
      Eigen::Vector2d lambda_exec = refs.lambda_nominal(s.stance_side);
      double t_next = refs.t_nominal;
      if (plan) {
        const int j_rel = s.domain_index - plan_domain;
        if (j_rel >= 0 && j_rel < static_cast<int>(plan->lambda.size())) {
          lambda_exec = plan->lambda[static_cast<size_t>(j_rel)];
          t_next = plan->t_step[static_cast<size_t>(j_rel)];
        }
      }
      if (planner) {
        // Re-record the completed domain on the phase grid of its realized
        // duration: early impacts otherwise leave the estimation window
        // phase-inconsistent with the dataset convention.
        Eigen::MatrixXd mu_grid(2, n_fine), eta_grid(2, n_fine);
        buffer.t.push_back(t_in_domain);
        buffer.mu.push_back(u_cmd);
        buffer.eta.push_back(pre_impact);
        for (int k = 0; k < n_fine; ++k) {
          Eigen::Vector2d mu_k, eta_k;
          buffer.sample(t_in_domain * k / n_fine, mu_k, eta_k);
          mu_grid.col(k) = mu_k;
          eta_grid.col(k) = eta_k;
        }
        planner->finalize_domain(s.domain_index, mu_grid, eta_grid);
        planner->record_transition(lambda_exec, t_next, pre_impact);
      }
      s = plant.apply_impact(s, lambda_exec);
      t_cur = t_next;
      next_grid = 0;
      buffer.clear();
      t_in_domain = 0.0;
      if (planner) do_replan(0.0);
    } else if (planner && s.tau > 0.0 && s.tau < 1.0) {
      const bool periodic = config.planner.replan_period > 0.0 &&
                            s.time - last_replan >= config.planner.replan_period;
      // Disturbance trigger: the measured CoM left the planned curve.
      bool deviated = false;
      if (config.planner.replan_error_threshold > 0.0 && tracking_plan &&
          s.time - last_replan >= 0.1) {
        deviated = (s.com - target.pos).norm() > config.planner.replan_error_threshold;
      }
      if (periodic || deviated) do_replan(s.tau);
    }
  }
  return logout;
}

namespace {

Json vec2_json(const Eigen::Vector2d& v) { return Json::array({v(0), v(1)}); }

}  // namespace

Json runlog_to_json(const RunLog& log) {
  Json j;
  j["arm"] = to_string(log.arm);
  j["seed"] = log.seed;
  j["duration"] = log.duration;
  j["outcome"] = log.outcome == Outcome::Completed ? "completed" : "fell";
  j["fall_time"] = log.fall_time;
  Json perts = Json::array();
  for (const auto& p : log.perturbations) {
    perts.push_back({{"time", p.time},
                     {"duration", p.duration},
                     {"delta_v", vec2_json(p.delta_v)}});
  }
  j["perturbations"] = perts;
  Json replans = Json::array();
  for (const auto& r : log.replans) {
    Json rr;
    rr["time"] = r.time;
    rr["domain"] = r.domain;
    rr["tau"] = r.tau;
    rr["accepted"] = r.accepted;
    rr["gamma_norm"] = r.gamma_norm;
    rr["sigma_norm"] = r.sigma_norm;
    rr["objective"] = r.objective;
    rr["iterations"] = r.iterations;
    Json lambdas = Json::array();
    for (const auto& l : r.lambda) lambdas.push_back(vec2_json(l));
    rr["lambda"] = lambdas;
    rr["t_step"] = r.t_step;
    Json alphas = Json::array();
    for (const auto& a : r.alpha) {
      Json rows = Json::array();
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        rows.push_back(Json::array({a(i, 0), a(i, 1)}));
      }
      alphas.push_back(rows);
    }
    rr["alpha"] = alphas;
    replans.push_back(rr);
  }
  j["replans"] = replans;
  j["tick_columns"] = Json::array({"time", "com_x", "com_y", "vel_x", "vel_y", "cop_x", "cop_y",
                                   "stance_x", "stance_y", "tau", "domain", "perturb_active"});
  Json ticks = Json::array();
  for (const auto& t : log.ticks) {
    ticks.push_back(Json::array({t.time, t.com_world(0), t.com_world(1), t.com_vel(0),
                                 t.com_vel(1), t.cop_world(0), t.cop_world(1), t.stance_world(0),
                                 t.stance_world(1), t.tau, t.domain, t.perturb_active ? 1 : 0}));
  }
  j["ticks"] = ticks;
  return j;
}

void write_runlog_csv(const std::string& path, const RunLog& log) {
  std::ofstream f(path, std::ios::binary);
  if (!f.good()) throw Error(ErrorKind::IoError, "cannot open for writing: " + path);
  f << "time,com_x,com_y,vel_x,vel_y,cop_x,cop_y,stance_x,stance_y,tau,domain,perturb_active\n";
  for (const auto& t : log.ticks) {
    f << format_double(t.time) << ',' << format_double(t.com_world(0)) << ','
      << format_double(t.com_world(1)) << ',' << format_double(t.com_vel(0)) << ','
      << format_double(t.com_vel(1)) << ',' << format_double(t.cop_world(0)) << ','
      << format_double(t.cop_world(1)) << ',' << format_double(t.stance_world(0)) << ','
      << format_double(t.stance_world(1)) << ',' << format_double(t.tau) << ',' << t.domain
      << ',' << (t.perturb_active ? 1 : 0) << '\n';
  }
}

ArmMetrics metrics_from_log(const RunLog& log, double window) {
  ArmMetrics m;
  m.arm = log.arm;
  m.outcome = log.outcome;
  m.fall_time = log.fall_time;
  if (!log.ticks.empty()) {
    const double t_end = log.ticks.back().time;
    const double t_start = std::max(0.0, t_end - window);
    const TickRecord* first = nullptr;
    std::vector<double> vels;
    for (const auto& t : log.ticks) {
      if (t.time < t_start) continue;
      if (!first) first = &t;
      vels.push_back(t.com_vel(0));
    }
    if (first && log.ticks.back().time > first->time) {
      m.realized_mean = (log.ticks.back().com_world(0) - first->com_world(0)) /
                        (log.ticks.back().time - first->time);
    }
    if (!vels.empty()) {
      double mean = 0.0;
      for (double v : vels) mean += v;
      mean /= static_cast<double>(vels.size());
      double var = 0.0;
      for (double v : vels) var += (v - mean) * (v - mean);
      m.realized_std = std::sqrt(var / static_cast<double>(vels.size()));
    }
  }
  std::vector<int> iters;
  std::vector<double> times;
  double slack_sum = 0.0;
  int slack_count = 0;
  for (const auto& r : log.replans) {
    if (!r.accepted) continue;
    iters.push_back(r.iterations);
    times.push_back(r.solve_ms);
    slack_sum += r.sigma_norm;
    m.slack_max = std::max(m.slack_max, r.sigma_norm);
    ++slack_count;
  }
  if (slack_count > 0) m.slack_mean = slack_sum / slack_count;
  if (!iters.empty()) {
    std::sort(iters.begin(), iters.end());
    std::sort(times.begin(), times.end());
    m.solve_iterations_median = iters[iters.size() / 2];
    m.solve_iterations_max = iters.back();
    m.solve_ms_median = times[times.size() / 2];
    m.solve_ms_max = times.back();
  }
  return m;
}

Json report_to_json(const ExperimentReport& report) {
  Json j;
  j["seed"] = report.seed;
  j["perturbation_schedule_hash"] = report.perturbation_schedule_hash;
  Json arms = Json::array();
  for (const auto& a : report.arms) {
    arms.push_back({{"arm", to_string(a.arm)},
                    {"outcome", a.outcome == Outcome::Completed ? "completed" : "fell"},
                    {"fall_time", a.fall_time},
                    {"realized_mean", a.realized_mean},
                    {"realized_std", a.realized_std},
                    {"slack_mean", a.slack_mean},
                    {"slack_max", a.slack_max},
                    {"solve_iterations_median", a.solve_iterations_median},
                    {"solve_iterations_max", a.solve_iterations_max}});
  }
  j["arms"] = arms;
  Json tracking = Json::array();
  for (const auto& t : report.tracking) {
    tracking.push_back({{"v_des", t.v_des},
                        {"realized_mean", t.realized_mean},
                        {"realized_std", t.realized_std},
                        {"fell", t.fell},
                        {"fall_time", t.fall_time}});
  }
  j["tracking"] = tracking;
  return j;
}

ExperimentReport tracking_experiment(const ToolConfig& config, const Dataset& dataset,
                                     const std::vector<double>& speeds, double duration) {
  if (duration < config.experiment.window) {
    throw Error(ErrorKind::ConfigError, "duration shorter than the metrics window");
  }
  ExperimentReport report;
  report.seed = config.seed;
  for (double v : speeds) {
    ToolConfig run_cfg = config;
    run_cfg.gait.v_des = v;
    RunLog log = run_closed_loop(Arm::Hddpc, run_cfg, &dataset, {}, duration, config.seed);
    ArmMetrics m = metrics_from_log(log, config.experiment.window);
    SpeedMetrics sm;
    sm.v_des = v;
    sm.realized_mean = m.realized_mean;
    sm.realized_std = m.realized_std;
    sm.fell = log.outcome == Outcome::Fell;
    sm.fall_time = log.fall_time;
    report.tracking.push_back(sm);
  }
  return report;
}

ExperimentReport perturbation_experiment(const ToolConfig& config, const Dataset& dataset,
                                         unsigned long seed) {
  ExperimentReport report;
  report.seed = seed;
  const double duration = config.experiment.duration;
  std::vector<Perturbation> schedule =
      make_perturbation_schedule(config.experiment.perturbation, duration, seed);
  report.perturbation_schedule_hash = schedule_hash(schedule);
  for (Arm arm : {Arm::Nominal, Arm::Ddpc, Arm::Hddpc}) {
    RunLog log = run_closed_loop(arm, config, &dataset, schedule, duration, seed);
    report.arms.push_back(metrics_from_log(log, config.experiment.window));
  }
  return report;
}

}  // namespace hddpc
