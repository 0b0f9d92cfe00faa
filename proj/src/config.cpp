#include "hddpc/config.hpp"

#include <sstream>

#include "hddpc/errors.hpp"

namespace hddpc {

CollectionConfig::CollectionConfig() {
  // Golden-ratio sweep: deterministic, non-repeating, well spread.
  const int n = 2 * cycles + 1;
  const double phi = 0.6180339887498949;
  double u = 0.0;
  for (int k = 0; k < n; ++k) {
    u = std::fmod(u + phi, 1.0);
    step_lengths.push_back(0.0 + 0.21 * u);
    const double v = std::fmod(0.37 + u * 0.77, 1.0);
    step_durations.push_back(0.9 + 0.2 * v);
    const double w = std::fmod(0.71 + u * 0.53, 1.0);
    step_widths.push_back(0.18 + 0.04 * w);
  }
}

Json default_config_json() {
  ToolConfig d;
  Json j;
  j["seed"] = 1;
  j["lip"] = {{"z0", d.lip.z0}, {"g", d.lip.g}, {"t_ssp", d.lip.t_ssp}, {"t_dsp", d.lip.t_dsp}};
  j["gait"] = {{"v_des", d.gait.v_des}, {"step_width", d.gait.step_width}};
  j["plant"] = {
      {"height_wobble_amplitude", 0.018},
      {"cop_lag_time_constant", 0.03},
      {"process_noise_std", 0.005},
      {"cop_halfwidth", {0.08, 0.05}},
      {"early_impact_phase_jitter", 0.0},
      {"min_phase_threshold", 0.3},
      {"fall_position_limit", 0.6},
      {"fall_velocity_limit", 2.0},
      {"dt", 1e-3},
  };
  j["tracker"] = {{"kp", d.tracker.kp}, {"kd", d.tracker.kd}};
  j["collection"] = {
      {"cycles", d.collection.cycles},
      {"step_lengths", d.collection.step_lengths},
      {"step_durations", d.collection.step_durations},
      {"step_widths", d.collection.step_widths},
  };
  j["planner"] = {
      {"domains_ahead", d.planner.domains_ahead},
      {"transitions_ahead", d.planner.transitions_ahead},
      {"t_ini", d.planner.t_ini},
      {"t_ini_s2s", d.planner.t_ini_s2s},
      {"samples_per_step", d.planner.samples_per_step},
      {"samples_per_step_future", d.planner.samples_per_step_future},
      {"bezier_degree", d.planner.bezier_degree},
      {"q_weight", {d.planner.q_weight(0), d.planner.q_weight(1)}},
      {"r_weight", {d.planner.r_weight(0), d.planner.r_weight(1)}},
      {"psi_gamma", d.planner.psi_gamma},
      {"psi_sigma", d.planner.psi_sigma},
      {"s2s_cost_scale", d.planner.s2s_cost_scale},
      {"lambda_x_bounds", {d.planner.lambda_x_bounds(0), d.planner.lambda_x_bounds(1)}},
      {"lambda_y_mag_bounds",
       {d.planner.lambda_y_mag_bounds(0), d.planner.lambda_y_mag_bounds(1)}},
      {"t_step_bounds", {d.planner.t_step_bounds(0), d.planner.t_step_bounds(1)}},
      {"vel_x_bounds", {d.planner.vel_x_bounds(0), d.planner.vel_x_bounds(1)}},
      {"vel_y_bounds", {d.planner.vel_y_bounds(0), d.planner.vel_y_bounds(1)}},
      {"include_velocity_bounds", d.planner.include_velocity_bounds},
      {"feasibility_tol", d.planner.feasibility_tol},
      {"replan_period", d.planner.replan_period},
      {"replan_error_threshold", d.planner.replan_error_threshold},
      {"ridge", d.planner.ridge},
      {"rank_tolerance", d.planner.rank_tolerance},
  };
  QpSettings s;
  j["solver"] = {
      {"eps_abs", s.eps_abs},   {"eps_rel", s.eps_rel}, {"max_iter", s.max_iter},
      {"rho", s.rho},           {"sigma", s.sigma},     {"alpha", s.alpha},
      {"polish", s.polish},     {"adaptive_rho", s.adaptive_rho},
  };
  j["experiment"] = {
      {"duration", d.experiment.duration},
      {"window", d.experiment.window},
      {"speeds", d.experiment.speeds},
      {"perturbation",
       {{"enabled", d.experiment.perturbation.enabled},
        {"interval", d.experiment.perturbation.interval},
        {"pulse_duration", d.experiment.perturbation.pulse_duration},
        {"magnitude_min", d.experiment.perturbation.magnitude_min},
        {"magnitude_max", d.experiment.perturbation.magnitude_max}}},
  };
  return j;
}

namespace {

void validate_keys(const Json& user, const Json& schema, const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.contains(it.key())) {
      throw Error(ErrorKind::ConfigError, "unknown config key: " + path);
    }
    const Json& ref = schema.at(it.key());
    if (ref.is_object()) {
      if (!it.value().is_object()) {
        throw Error(ErrorKind::ConfigError, "expected an object at: " + path);
      }
      validate_keys(it.value(), ref, path);
    }
  }
}

void merge(Json& base, const Json& user) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base.at(it.key()).is_object()) {
      merge(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

Json parse_override_value(const Json& reference, const std::string& text,
                          const std::string& path) {
  try {
    if (reference.is_boolean()) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw Error(ErrorKind::ConfigError, "expected a boolean for " + path);
    }
    if (reference.is_number_integer() || reference.is_number_unsigned()) {
      return std::stoll(text);
    }
    if (reference.is_number_float()) {
      return std::stod(text);
    }
    if (reference.is_array()) {
      Json arr = Json::array();
      std::stringstream ss(text);
      std::string item;
      const Json& elem_ref = reference.empty() ? Json(0.0) : reference.front();
      while (std::getline(ss, item, ',')) {
        arr.push_back(parse_override_value(elem_ref, item, path));
      }
      return arr;
    }
    return text;  // string
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, "cannot parse override value for " + path);
  }
}

void apply_override(Json& tree, const std::string& spec) {
  const size_t eq = spec.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorKind::ConfigError, "override must look like key.path=value: " + spec);
  }
  const std::string path = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);
  Json* node = &tree;
  std::stringstream ss(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(ss, key, '.')) keys.push_back(key);
  if (keys.empty()) throw Error(ErrorKind::ConfigError, "empty override key");
  for (size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->contains(keys[i])) {
      throw Error(ErrorKind::ConfigError, "unknown config key: " + path);
    }
    node = &(*node)[keys[i]];
  }
  if (!node->contains(keys.back())) {
    throw Error(ErrorKind::ConfigError, "unknown config key: " + path);
  }
  (*node)[keys.back()] = parse_override_value(node->at(keys.back()), value, path);
}

Eigen::Vector2d vec2(const Json& j) {
  return Eigen::Vector2d(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

ToolConfig config_from_json(const Json& j) {
  ToolConfig c;
  c.seed = j.at("seed").get<unsigned long>();
  const Json& lip = j.at("lip");
  c.lip = LipParams{lip.at("z0").get<double>(), lip.at("g").get<double>(),
                    lip.at("t_ssp").get<double>(), lip.at("t_dsp").get<double>()};
  const Json& gait = j.at("gait");
  c.gait.v_des = gait.at("v_des").get<double>();
  c.gait.step_width = gait.at("step_width").get<double>();
  const Json& plant = j.at("plant");
  c.plant.lip = c.lip;
  c.plant.height_wobble_amplitude = plant.at("height_wobble_amplitude").get<double>();
  c.plant.cop_lag_time_constant = plant.at("cop_lag_time_constant").get<double>();
  c.plant.process_noise_std = plant.at("process_noise_std").get<double>();
  c.plant.cop_halfwidth = vec2(plant.at("cop_halfwidth"));
  c.plant.early_impact_phase_jitter = plant.at("early_impact_phase_jitter").get<double>();
  c.plant.min_phase_threshold = plant.at("min_phase_threshold").get<double>();
  c.plant.fall_position_limit = plant.at("fall_position_limit").get<double>();
  c.plant.fall_velocity_limit = plant.at("fall_velocity_limit").get<double>();
  c.plant.dt = plant.at("dt").get<double>();
  c.plant.seed = c.seed;
  const Json& tracker = j.at("tracker");
  c.tracker.kp = tracker.at("kp").get<double>();
  c.tracker.kd = tracker.at("kd").get<double>();
  const Json& col = j.at("collection");
  c.collection.cycles = col.at("cycles").get<int>();
  c.collection.step_lengths = col.at("step_lengths").get<std::vector<double>>();
  c.collection.step_durations = col.at("step_durations").get<std::vector<double>>();
  c.collection.step_widths = col.at("step_widths").get<std::vector<double>>();
  const Json& p = j.at("planner");
  c.planner.domains_ahead = p.at("domains_ahead").get<int>();
  c.planner.transitions_ahead = p.at("transitions_ahead").get<int>();
  c.planner.t_ini = p.at("t_ini").get<int>();
  c.planner.t_ini_s2s = p.at("t_ini_s2s").get<int>();
  c.planner.samples_per_step = p.at("samples_per_step").get<int>();
  c.planner.samples_per_step_future = p.at("samples_per_step_future").get<int>();
  c.planner.bezier_degree = p.at("bezier_degree").get<int>();
  c.planner.q_weight = vec2(p.at("q_weight"));
  c.planner.r_weight = vec2(p.at("r_weight"));
  c.planner.psi_gamma = p.at("psi_gamma").get<double>();
  c.planner.psi_sigma = p.at("psi_sigma").get<double>();
  c.planner.s2s_cost_scale = p.at("s2s_cost_scale").get<double>();
  c.planner.lambda_x_bounds = vec2(p.at("lambda_x_bounds"));
  c.planner.lambda_y_mag_bounds = vec2(p.at("lambda_y_mag_bounds"));
  c.planner.t_step_bounds = vec2(p.at("t_step_bounds"));
  c.planner.vel_x_bounds = vec2(p.at("vel_x_bounds"));
  c.planner.vel_y_bounds = vec2(p.at("vel_y_bounds"));
  c.planner.include_velocity_bounds = p.at("include_velocity_bounds").get<bool>();
  c.planner.feasibility_tol = p.at("feasibility_tol").get<double>();
  c.planner.replan_period = p.at("replan_period").get<double>();
  c.planner.replan_error_threshold = p.at("replan_error_threshold").get<double>();
  c.planner.ridge = p.at("ridge").get<double>();
  c.planner.rank_tolerance = p.at("rank_tolerance").get<double>();
  const Json& s = j.at("solver");
  c.solver.eps_abs = s.at("eps_abs").get<double>();
  c.solver.eps_rel = s.at("eps_rel").get<double>();
  c.solver.max_iter = s.at("max_iter").get<int>();
  c.solver.rho = s.at("rho").get<double>();
  c.solver.sigma = s.at("sigma").get<double>();
  c.solver.alpha = s.at("alpha").get<double>();
  c.solver.polish = s.at("polish").get<bool>();
  c.solver.adaptive_rho = s.at("adaptive_rho").get<bool>();
  const Json& e = j.at("experiment");
  c.experiment.duration = e.at("duration").get<double>();
  c.experiment.window = e.at("window").get<double>();
  c.experiment.speeds = e.at("speeds").get<std::vector<double>>();
  const Json& pe = e.at("perturbation");
  c.experiment.perturbation.enabled = pe.at("enabled").get<bool>();
  c.experiment.perturbation.interval = pe.at("interval").get<double>();
  c.experiment.perturbation.pulse_duration = pe.at("pulse_duration").get<double>();
  c.experiment.perturbation.magnitude_min = pe.at("magnitude_min").get<double>();
  c.experiment.perturbation.magnitude_max = pe.at("magnitude_max").get<double>();
  return c;
}

namespace {

void check_invariants(const ToolConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::ConfigError, what);
  };
  require(c.lip.z0 > 0 && c.lip.g > 0 && c.lip.t_ssp > 0 && c.lip.t_dsp >= 0,
          "lip parameters must be positive (t_dsp nonnegative)");
  require(c.plant.dt > 0, "plant.dt must be positive");
  require(c.plant.cop_halfwidth.minCoeff() > 0, "plant.cop_halfwidth must be positive");
  require(c.plant.min_phase_threshold > 0 && c.plant.min_phase_threshold < 1,
          "plant.min_phase_threshold must be in (0,1)");
  require(c.collection.cycles >= 1, "collection.cycles must be at least 1");
  require(!c.collection.step_lengths.empty() && !c.collection.step_durations.empty() &&
              !c.collection.step_widths.empty(),
          "collection arrays must be nonempty");
  for (double d : c.collection.step_durations) {
    require(d > 0, "collection.step_durations must be positive");
  }
  require(c.planner.transitions_ahead >= c.planner.domains_ahead,
          "planner.transitions_ahead must be >= planner.domains_ahead");
  require(c.planner.t_ini >= 1 && c.planner.t_ini_s2s >= 1,
          "estimation horizons must be at least 1");
  require(c.planner.samples_per_step > c.planner.t_ini &&
              c.planner.samples_per_step_future >= c.planner.t_ini,
          "phase grids must be longer than t_ini");
  require(c.planner.bezier_degree >= 1, "planner.bezier_degree must be at least 1");
  require(c.experiment.duration > 0 && c.experiment.window > 0,
          "experiment durations must be positive");
}

}  // namespace

ToolConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json tree = default_config_json();
  if (!path.empty()) {
    Json user;
    try {
      user = read_json_file(path);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
    validate_keys(user, tree, "");
    merge(tree, user);
  }
  for (const auto& o : overrides) apply_override(tree, o);
  ToolConfig c = config_from_json(tree);
  check_invariants(c);
  return c;
}

}  // namespace hddpc
