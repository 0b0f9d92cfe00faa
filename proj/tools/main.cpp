#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hddpc/config.hpp"
#include "hddpc/dataset.hpp"
#include "hddpc/errors.hpp"
#include "hddpc/hankel.hpp"
#include "hddpc/harness.hpp"
#include "hddpc/jsonio.hpp"
#include "hddpc/planner.hpp"

namespace {

using namespace hddpc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCollection = 3;
constexpr int kExitFell = 4;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  long long seed = -1;
};

ToolConfig resolve_config(const CommonOpts& opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (opts.seed >= 0) overrides.push_back("seed=" + std::to_string(opts.seed));
  return load_config(opts.config_path, overrides);
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration JSON (defaults when omitted)");
  cmd->add_option("--override", opts.overrides, "dotted-key override KEY=VALUE")
      ->take_all();
  cmd->add_option("--seed", opts.seed, "override the RNG seed");
}

std::string csv_path_for(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".csv");
  return p.string();
}

int cmd_collect(const CommonOpts& opts, const std::string& out) {
  ToolConfig cfg = resolve_config(opts);
  Dataset data;
  try {
    data = collect_dataset(cfg);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CollectionFellOver) {
      std::fprintf(stderr, "collection failed: %s\n", e.what());
      return kExitCollection;
    }
    throw;
  }
  save_dataset(out, data);

  // Summary: column counts and rank report per block.
  HankelBank bank = build_hankel_bank(data, cfg.planner);
  auto report = [&](const char* name, const HankelMatrix& h) {
    PersistencyReport r = persistency_order(h, cfg.planner.rank_tolerance);
    std::printf("%-10s rows %4ld  columns %3ld  rank %3ld%s\n", name, long(h.rows()),
                long(h.cols()), long(r.numerical_rank), r.full_row_rank ? "  (full row rank)" : "");
  };
  std::printf("dataset written to %s\n", out.c_str());
  std::printf("blocks: stance_L=%zu stance_R=%zu s2s_L2R=%zu s2s_R2L=%zu\n",
              data.stance_left.size(), data.stance_right.size(), data.s2s_l2r.size(),
              data.s2s_r2l.size());
  report("stance_L", bank.left.eta[0]);
  report("stance_R", bank.right.eta[0]);
  report("s2s_L2R", bank.s2s_mu_l2r);
  report("s2s_R2L", bank.s2s_mu_r2l);
  return kExitOk;
}

int cmd_simulate(const CommonOpts& opts, const std::string& dataset_path, const std::string& arm_s,
                 const std::string& out) {
  ToolConfig cfg = resolve_config(opts);
  auto arm = arm_from_string(arm_s);
  if (!arm) throw Error(ErrorKind::ConfigError, "unknown arm: " + arm_s);
  Dataset data;
  const Dataset* data_ptr = nullptr;
  if (*arm != Arm::Nominal) {
    if (dataset_path.empty()) {
      throw Error(ErrorKind::ConfigError, "planned arms require --dataset");
    }
    data = load_dataset(dataset_path);
    data_ptr = &data;
  }
  const double duration = cfg.experiment.duration;
  std::vector<Perturbation> schedule =
      make_perturbation_schedule(cfg.experiment.perturbation, duration, cfg.seed);
  RunLog log = run_closed_loop(*arm, cfg, data_ptr, schedule, duration, cfg.seed);
  write_json_file(out, runlog_to_json(log));
  write_runlog_csv(csv_path_for(out), log);
  ArmMetrics m = metrics_from_log(log, cfg.experiment.window);
  std::printf("run %s: %s", to_string(*arm),
              log.outcome == Outcome::Completed ? "completed" : "fell");
  if (log.outcome == Outcome::Fell) std::printf(" at t=%.3f s", log.fall_time);
  std::printf("; realized speed %.4f m/s (std %.4f)\n", m.realized_mean, m.realized_std);
  if (m.solve_iterations_max > 0) {
    std::printf("solves: median %d iters (%.2f ms), max %d iters (%.2f ms)\n",
                m.solve_iterations_median, m.solve_ms_median, m.solve_iterations_max,
                m.solve_ms_max);
  }
  return log.outcome == Outcome::Completed ? kExitOk : kExitFell;
}

int cmd_compare(const CommonOpts& opts, const std::string& dataset_path, const std::string& out_dir,
                const std::string& speeds_arg) {
  ToolConfig cfg = resolve_config(opts);
  Dataset data = load_dataset(dataset_path);
  std::filesystem::create_directories(out_dir);

  ToolConfig pert_cfg = cfg;
  pert_cfg.experiment.perturbation.enabled = true;
  ExperimentReport report = perturbation_experiment(pert_cfg, data, cfg.seed);
  for (const auto& arm : report.arms) {
    ExperimentReport single;
    single.seed = report.seed;
    single.perturbation_schedule_hash = report.perturbation_schedule_hash;
    single.arms.push_back(arm);
    write_json_file(out_dir + "/report_" + to_string(arm.arm) + ".json", report_to_json(single));
  }
  {
    std::ofstream f(out_dir + "/combined.csv", std::ios::binary);
    f << "arm,outcome,fall_time,realized_mean,realized_std,slack_mean,slack_max\n";
    for (const auto& a : report.arms) {
      f << to_string(a.arm) << ',' << (a.outcome == Outcome::Completed ? "completed" : "fell")
        << ',' << format_double(a.fall_time) << ',' << format_double(a.realized_mean) << ','
        << format_double(a.realized_std) << ',' << format_double(a.slack_mean) << ','
        << format_double(a.slack_max) << '\n';
    }
  }
  std::printf("perturbation comparison (schedule %s):\n",
              report.perturbation_schedule_hash.c_str());
  for (const auto& a : report.arms) {
    std::printf("  %-8s %s", to_string(a.arm),
                a.outcome == Outcome::Completed ? "completed" : "fell");
    if (a.outcome == Outcome::Fell) std::printf(" at t=%.3f s", a.fall_time);
    std::printf("\n");
  }

  if (!speeds_arg.empty()) {
    std::vector<double> speeds;
    std::stringstream ss(speeds_arg);
    std::string item;
    while (std::getline(ss, item, ',')) speeds.push_back(std::stod(item));
    ExperimentReport tracking =
        tracking_experiment(cfg, data, speeds, std::max(cfg.experiment.duration,
                                                        cfg.experiment.window));
    write_json_file(out_dir + "/tracking.json", report_to_json(tracking));
    std::ofstream f(out_dir + "/tracking.csv", std::ios::binary);
    f << "v_des,realized_mean,realized_std,fell,fall_time\n";
    for (const auto& t : tracking.tracking) {
      f << format_double(t.v_des) << ',' << format_double(t.realized_mean) << ','
        << format_double(t.realized_std) << ',' << (t.fell ? 1 : 0) << ','
        << format_double(t.fall_time) << '\n';
    }
    std::printf("tracking sweep over %zu speeds written\n", tracking.tracking.size());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven predictive walking control toolkit"};
  app.require_subcommand(1);

  CommonOpts collect_opts, sim_opts, cmp_opts;
  std::string collect_out = "dataset.json";
  std::string sim_dataset, sim_arm = "hddpc", sim_out = "runlog.json";
  std::string cmp_dataset, cmp_out = "compare", cmp_speeds;

  CLI::App* collect = app.add_subcommand("collect", "walk the plant and record a dataset");
  add_common(collect, collect_opts);
  collect->add_option("--out", collect_out, "output dataset path");

  CLI::App* simulate = app.add_subcommand("simulate", "closed-loop run of one arm");
  add_common(simulate, sim_opts);
  simulate->add_option("--dataset", sim_dataset, "dataset JSON (required for planned arms)");
  simulate->add_option("--arm", sim_arm, "nominal | ddpc | hddpc");
  simulate->add_option("--out", sim_out, "run log JSON path (CSV written alongside)");

  CLI::App* compare = app.add_subcommand("compare", "run all three arms under one schedule");
  add_common(compare, cmp_opts);
  compare->add_option("--dataset", cmp_dataset, "dataset JSON")->required();
  compare->add_option("--out", cmp_out, "output directory");
  compare->add_option("--speeds", cmp_speeds, "comma-separated tracking sweep speeds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (collect->parsed()) return cmd_collect(collect_opts, collect_out);
    if (simulate->parsed()) return cmd_simulate(sim_opts, sim_dataset, sim_arm, sim_out);
    if (compare->parsed()) return cmd_compare(cmp_opts, cmp_dataset, cmp_out, cmp_speeds);
  } catch (const hddpc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case hddpc::ErrorKind::CollectionFellOver: return kExitCollection;
      case hddpc::ErrorKind::ConfigError:
      case hddpc::ErrorKind::IoError: return kExitConfig;
      default: return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
