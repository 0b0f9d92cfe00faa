#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hddpc/dataset.hpp"
#include "hddpc/hankel.hpp"
#include "hddpc/qp.hpp"
#include "hddpc/rom.hpp"

// The hybrid data-driven predictive controller: one convex program per
// replan that couples per-domain trajectory Hankel constraints, step-to-step
// Hankel constraints, Bezier smoothing, support-polygon and velocity bounds,
// and the shrinking horizon of the current domain. Decision variables per
// domain d are (alpha, mu, eta, gamma, sigma); per transition j they are
// ((lambda, T), eta_s2s, gamma_s2s, sigma_s2s).

namespace hddpc {

struct HddpcConfig {
  int domains_ahead = 2;           // K: future domains beyond the current one
  int transitions_ahead = 2;       // J >= K
  int t_ini = 4;
  int t_ini_s2s = 2;
  int samples_per_step = 50;       // fine phase grid (current domain)
  int samples_per_step_future = 12;
  int bezier_degree = 5;
  Eigen::Vector2d q_weight{10.0, 10.0};
  Eigen::Vector2d r_weight{0.1, 0.1};
  double psi_gamma = 1e-2;
  double psi_sigma = 1e3;
  double s2s_cost_scale = 1.0;     // scales psi_* on the S2S blocks
  Eigen::Vector2d lambda_x_bounds{-0.25, 0.45};
  Eigen::Vector2d lambda_y_mag_bounds{0.05, 0.40};  // |lateral step|, sign per direction
  Eigen::Vector2d t_step_bounds{0.7, 1.4};
  Eigen::Vector2d vel_x_bounds{-1.5, 1.5};
  Eigen::Vector2d vel_y_bounds{-1.5, 1.5};
  bool include_velocity_bounds = true;
  bool pin_contact_schedule = false;  // DDPC arm: lambda/T boxes collapse to nominal
  double feasibility_tol = 1e-4;
  double replan_period = 0.0;      // seconds; 0 replans only at domain start
  // Replan mid-step when the measured CoM deviates from the active plan by
  // more than this (meters); 0 disables the trigger.
  double replan_error_threshold = 0.0;
  double ridge = 1e-8;             // curvature on cost-free blocks
  double rank_tolerance = 1e-10;
};

struct GaitParams {
  double v_des = 0.1;       // m/s forward
  double step_width = 0.2;  // m between feet
};

// Shrinking-horizon selection for the current domain.
HankelMatrix shrink_select(const HankelMatrix& h, double tau, int t_ini, int max_n,
                           int block_dim);

struct GridSample {
  int domain_index = 0;
  int grid_index = 0;
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Vector2d eta = Eigen::Vector2d::Zero();
};

// Last t_ini samples as (mu_ini, eta_ini) columns; samples recorded before
// the latest impact are shifted into the current stance frame.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_ini_window(
    const std::vector<GridSample>& history, int t_ini, const Eigen::Vector2d& lambda_last,
    int current_domain);

struct S2STransition {
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();   // placement at the transition
  double t_next = 1.0;                                // duration of the entered step
  Eigen::Vector2d pre_impact_com = Eigen::Vector2d::Zero();
};

struct S2SHistory {
  std::vector<S2STransition> transitions;  // chronological
};

// Per-side composed continuous matrices (one slot per position in the plan)
// plus the two step-to-step matrices.
struct HankelBank {
  // slot 0: fine tail over fine body (current domain)
  // slot 1: fine tail over coarse body (first future domain)
  // slot 2: coarse tail over coarse body (later future domains)
  struct Side {
    HankelMatrix mu[3];
    HankelMatrix eta[3];
  };
  Side left;
  Side right;
  HankelMatrix s2s_mu_l2r, s2s_eta_l2r;
  HankelMatrix s2s_mu_r2l, s2s_eta_r2l;
  int n_fine = 50;
  int n_coarse = 12;
  int t_ini = 4;
  int t_ini_s2s = 2;

  const Side& side(StanceSide s) const { return s == StanceSide::Left ? left : right; }
};

HankelBank build_hankel_bank(const Dataset& dataset, const HddpcConfig& config);

// Nominal orbit references: CoM samples per side on both grids, nominal
// placements per transition direction, and boundary states.
struct OrbitReferences {
  Eigen::MatrixXd fine_left, fine_right;      // 2 x n_fine
  Eigen::MatrixXd coarse_left, coarse_right;  // 2 x n_coarse
  Eigen::Vector2d lambda_l2r, lambda_r2l;
  double t_nominal = 1.0;
  Eigen::Vector2d start_com_left, start_vel_left;
  Eigen::Vector2d start_com_right, start_vel_right;
  Eigen::Vector2d pre_impact_left, pre_impact_right;

  const Eigen::MatrixXd& fine(StanceSide s) const {
    return s == StanceSide::Left ? fine_left : fine_right;
  }
  const Eigen::MatrixXd& coarse(StanceSide s) const {
    return s == StanceSide::Left ? coarse_left : coarse_right;
  }
  const Eigen::Vector2d& lambda_nominal(StanceSide from) const {
    return from == StanceSide::Left ? lambda_l2r : lambda_r2l;
  }
  Eigen::Vector2d start_com(StanceSide s) const {
    return s == StanceSide::Left ? start_com_left : start_com_right;
  }
  Eigen::Vector2d start_vel(StanceSide s) const {
    return s == StanceSide::Left ? start_vel_left : start_vel_right;
  }
  Eigen::Vector2d pre_impact(StanceSide s) const {
    return s == StanceSide::Left ? pre_impact_left : pre_impact_right;
  }
};

OrbitReferences extract_reference(const GaitParams& gait, const LipParams& lip,
                                  int n_fine, int n_coarse);

// Measured state handed to the planner at a replan.
struct PlannerState {
  StanceSide side = StanceSide::Left;
  int domain_index = 0;
  double tau = 0.0;
  double t_current = 1.0;  // committed duration of the current domain
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  Eigen::Vector2d com_vel = Eigen::Vector2d::Zero();
};

// Assembled program plus the block map needed to read the solution back.
struct AssembledPlan {
  QpProblem qp;
  int k_domains = 0;   // K
  int j_transitions = 0;
  int t_ini = 0;
  int t_ini_s2s = 0;
  int degree = 0;
  int offset = 0;      // floor(max_n * tau)
  double tau = 0.0;
  double t0 = 0.0;
  double t_current = 1.0;
  StanceSide side = StanceSide::Left;
  std::vector<int> n_d;
  std::vector<StanceSide> side_d;
  std::vector<Eigen::Index> alpha_off, mu_off, eta_off, gamma_off, sigma_off;
  std::vector<Eigen::Index> gamma_dim;
  std::vector<Eigen::Index> smu_off, seta_off, sgamma_off, ssigma_off;
  std::vector<Eigen::Index> sgamma_dim;
};

AssembledPlan hddpc_assemble(const PlannerState& state, const HankelBank& bank,
                             const std::vector<GridSample>& history,
                             const Eigen::Vector2d& lambda_last, const S2SHistory& s2s_history,
                             const OrbitReferences& refs, const Eigen::Vector2d& cop_halfwidth,
                             const HddpcConfig& config);

struct PlanResult {
  std::vector<Eigen::MatrixXd> alpha;      // per domain, (degree+1) x 2
  std::vector<Eigen::MatrixXd> mu, eta;    // per domain, 2 x n_d
  std::vector<Eigen::VectorXd> gamma, sigma;
  std::vector<Eigen::Vector2d> lambda;     // per transition
  std::vector<double> t_step;              // per transition
  std::vector<Eigen::Vector2d> eta_s2s;
  std::vector<Eigen::VectorXd> gamma_s2s, sigma_s2s;
  std::vector<StanceSide> side_d;
  double tau = 0.0;
  double t0 = 0.0;
  double t_current = 1.0;
  double objective = 0.0;
  double solve_ms = 0.0;  // wall clock, console diagnostics only
  QpSolution diagnostics;

  double sigma_norm() const;
  double gamma_norm() const;
};

// Extraction of an already-computed solution.
PlanResult hddpc_plan(const AssembledPlan& plan, const QpSolution& solution);

// One-shot solve + extraction; throws on certificate failures or when the
// residual exceeds feasibility_tol.
PlanResult hddpc_plan(const AssembledPlan& plan, const QpSettings& settings,
                      double feasibility_tol = 1e-4);

// Stateful planner: owns histories, the Hankel bank, references, and cached
// solvers for the domain-start problem shape. Single-owner, not shareable.
class HddpcPlanner {
 public:
  HddpcPlanner(const HddpcConfig& config, const LipParams& lip, const GaitParams& gait,
               const Eigen::Vector2d& cop_halfwidth, const Dataset& dataset,
               const QpSettings& solver_settings = {});
  ~HddpcPlanner();

  // Seed histories by replaying the reference orbit (cold start policy).
  void reset(StanceSide start_side);

  void record_sample(int domain_index, int grid_index, const Eigen::Vector2d& mu,
                     const Eigen::Vector2d& eta);
  void record_transition(const Eigen::Vector2d& lambda, double t_next,
                         const Eigen::Vector2d& pre_impact_com);

  // Replace a completed domain's samples with the full grid resampled over
  // the realized duration (keeps early-impact steps phase-consistent with
  // the dataset convention).
  void finalize_domain(int domain_index, const Eigen::MatrixXd& mu, const Eigen::MatrixXd& eta);

  // Assemble and solve; throws Error(SolverFailed) on certificate failures
  // and Error(InfeasibleBeyondTolerance) when the residual exceeds the
  // feasibility tolerance.
  PlanResult replan(const PlannerState& state);

  const OrbitReferences& references() const { return refs_; }
  const HankelBank& bank() const { return bank_; }
  const HddpcConfig& config() const { return config_; }

 private:
  HddpcConfig config_;
  LipParams lip_;
  GaitParams gait_;
  Eigen::Vector2d cop_halfwidth_;
  QpSettings solver_settings_;
  HankelBank bank_;
  OrbitReferences refs_;
  std::vector<GridSample> history_;
  Eigen::Vector2d lambda_last_ = Eigen::Vector2d::Zero();
  S2SHistory s2s_history_;
  // Cached solvers for the tau=0 shape, keyed by stance side.
  std::map<int, std::unique_ptr<QpSolver>> solver_cache_;
};

}  // namespace hddpc
