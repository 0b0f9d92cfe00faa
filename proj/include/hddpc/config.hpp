#pragma once

#include <string>
#include <vector>

#include "hddpc/jsonio.hpp"
#include "hddpc/planner.hpp"
#include "hddpc/plant.hpp"
#include "hddpc/qp.hpp"

// Tool configuration: a JSON document validated against the default tree
// (unknown keys rejected), with dotted-key overrides from the command line.

namespace hddpc {

struct CollectionConfig {
  // Parameter arrays are consumed per step (index modulo length). The
  // defaults are low-discrepancy sequences covering the ranges the planner
  // is expected to reach: consecutive-step patterns must be varied or the
  // step-to-step columns collapse onto the schedule's own pattern.
  int cycles = 30;
  std::vector<double> step_lengths;
  std::vector<double> step_durations;
  std::vector<double> step_widths;

  CollectionConfig();
};

struct TrackerConfig {
  double kp = 40.0;
  double kd = 9.0;
};

struct PerturbationConfig {
  bool enabled = false;
  double interval = 0.5;        // s between pulses
  double pulse_duration = 0.01; // s
  double magnitude_min = 0.10;  // m/s
  double magnitude_max = 0.15;  // m/s
};

struct ExperimentConfig {
  double duration = 10.0;
  double window = 10.0;  // realized-speed window
  std::vector<double> speeds{0.0, 0.05, 0.10, 0.15, 0.20};
  PerturbationConfig perturbation;
};

struct ToolConfig {
  unsigned long seed = 1;
  LipParams lip;
  GaitParams gait;
  PlantConfig plant;   // lip and seed filled in when instantiating
  TrackerConfig tracker;
  CollectionConfig collection;
  HddpcConfig planner;
  QpSettings solver;
  ExperimentConfig experiment;
};

// Default configuration as a JSON tree (the validation schema).
Json default_config_json();

// Parse a JSON tree (already merged/validated) into the typed config.
ToolConfig config_from_json(const Json& j);

// Load from file (empty path = defaults), apply "a.b.c=value" overrides,
// validate keys and invariants. Throws Error(ConfigError).
ToolConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace hddpc
