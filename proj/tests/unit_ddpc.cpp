#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "hddpc/ddpc.hpp"
#include "hddpc/errors.hpp"
#include "hddpc/hankel.hpp"

using namespace hddpc;

namespace {

struct RandomLti {
  LtiSystem sys;
  int beta, kappa, nu;
};

RandomLti random_observable_lti(std::mt19937_64& rng, int beta, int kappa, int nu) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    RandomLti out;
    out.beta = beta;
    out.kappa = kappa;
    out.nu = nu;
    out.sys.A = Eigen::MatrixXd::NullaryExpr(beta, beta, [&] { return gauss(rng); });
    // Scale to spectral radius ~0.9 so rollouts stay bounded.
    Eigen::VectorXcd ev = out.sys.A.eigenvalues();
    const double rad = ev.cwiseAbs().maxCoeff();
    if (rad > 1e-9) out.sys.A *= 0.9 / rad;
    out.sys.B = Eigen::MatrixXd::NullaryExpr(beta, kappa, [&] { return gauss(rng); });
    out.sys.M = Eigen::MatrixXd::NullaryExpr(nu, beta, [&] { return gauss(rng); });
    out.sys.D = Eigen::MatrixXd::NullaryExpr(nu, kappa, [&] { return gauss(rng); });
    // Observability check.
    Eigen::MatrixXd obs(nu * beta, beta);
    Eigen::MatrixXd mk = out.sys.M;
    for (int i = 0; i < beta; ++i) {
      obs.middleRows(nu * i, nu) = mk;
      mk = mk * out.sys.A;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(obs);
    if (qr.rank() == beta) return out;
  }
}

Trajectory rollout_trajectory(const LtiSystem& sys, const Eigen::VectorXd& x0,
                              const Eigen::MatrixXd& inputs) {
  Trajectory t;
  t.inputs = inputs;
  t.outputs = simulate_lti(sys, x0, inputs);
  t.duration = 1.0;
  return t;
}

}  // namespace

TEST_CASE("simulate_lti basics") {
  LtiSystem sys;
  sys.A = Eigen::MatrixXd::Identity(2, 2);
  sys.B = Eigen::MatrixXd::Identity(2, 2);
  sys.M = Eigen::MatrixXd::Identity(2, 2);
  sys.D = Eigen::MatrixXd::Zero(2, 2);

  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(2, 5);
  Eigen::MatrixXd out = simulate_lti(sys, Eigen::Vector2d::Zero(), zeros);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);

  // Integrator chain: unit input on channel 1 ramps the output, delayed by
  // one step.
  Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(2, 4);
  ones.row(0).setOnes();
  Eigen::MatrixXd ramp = simulate_lti(sys, Eigen::Vector2d::Zero(), ones);
  CHECK(ramp(0, 0) == 0.0);
  CHECK(ramp(0, 1) == 1.0);
  CHECK(ramp(0, 2) == 2.0);
  CHECK(ramp(0, 3) == 3.0);
}

TEST_CASE("simulate_lti matches a hand recursion") {
  std::mt19937_64 rng(7);
  auto lti = random_observable_lti(rng, 3, 2, 2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(3, [&] { return gauss(rng); });
  Eigen::MatrixXd u = Eigen::MatrixXd::NullaryExpr(2, 10, [&] { return gauss(rng); });
  Eigen::MatrixXd y = simulate_lti(lti.sys, x0, u);
  Eigen::VectorXd x = x0;
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd yt = lti.sys.M * x + lti.sys.D * u.col(t);
    CHECK((y.col(t) - yt).cwiseAbs().maxCoeff() < 1e-12);
    x = lti.sys.A * x + lti.sys.B * u.col(t);
  }
}

TEST_CASE("simulate_lti shape mismatch") {
  LtiSystem sys;
  sys.A = Eigen::MatrixXd::Identity(2, 2);
  sys.B = Eigen::MatrixXd::Identity(2, 1);
  sys.M = Eigen::MatrixXd::Identity(1, 2);
  sys.D = Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 4);
  CHECK_THROWS_AS(simulate_lti(sys, Eigen::Vector2d::Zero(), bad), Error);
}

TEST_CASE("ddpc variable count matches the block layout") {
  // gamma + sigma + mu + eta = columns + (kappa+nu)L + kappa N + nu N.
  const int kappa = 2, nu = 2, t_ini = 4, n = 46;
  DdpcProblem prob;
  prob.kappa = kappa;
  prob.nu = nu;
  prob.t_ini = t_ini;
  prob.n = n;
  prob.columns = 5;
  CHECK(prob.eta_offset() + nu * n == 5 + 200 + 92 + 92);
}

namespace {

struct ExactSetup {
  RandomLti lti;
  Partition part;
  Eigen::MatrixXd mu_ini, eta_ini;
  Eigen::VectorXd x_t0;           // true state at the prediction start
  Eigen::MatrixXd r_mu, r_eta;
  DdpcConfig config;
};

ExactSetup make_exact_setup(std::mt19937_64& rng, int beta, int kappa, int nu, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ExactSetup s;
  s.lti = random_observable_lti(rng, beta, kappa, nu);
  const int t_ini = beta;
  const int L = t_ini + n;
  const int pe_order = L + beta;
  const int T_data = (kappa + 1) * pe_order + 12;
  Eigen::MatrixXd u_data;
  Trajectory data;
  while (true) {
    u_data = Eigen::MatrixXd::NullaryExpr(kappa, T_data, [&] { return gauss(rng); });
    data = rollout_trajectory(s.lti.sys,
                              Eigen::VectorXd::NullaryExpr(beta, [&] { return gauss(rng); }),
                              u_data);
    HankelMatrix pe = build_sliding_matrix(data, Channel::Input, pe_order);
    if (persistency_order(pe).full_row_rank) break;
  }
  HankelMatrix h_u = build_sliding_matrix(data, Channel::Input, L);
  HankelMatrix h_y = build_sliding_matrix(data, Channel::Output, L);
  s.part = partition(h_u, h_y, PartitionSpec{t_ini, n});

  // Fresh rollout for the history window; track the state to know x(t0).
  Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(beta, [&] { return 0.5 * gauss(rng); });
  const int warm = 15;
  Eigen::MatrixXd u_hist = Eigen::MatrixXd::NullaryExpr(kappa, warm, [&] { return gauss(rng); });
  Eigen::MatrixXd y_hist(nu, warm);
  for (int t = 0; t < warm; ++t) {
    y_hist.col(t) = s.lti.sys.M * x + s.lti.sys.D * u_hist.col(t);
    x = s.lti.sys.A * x + s.lti.sys.B * u_hist.col(t);
  }
  s.x_t0 = x;
  s.mu_ini = u_hist.rightCols(t_ini);
  s.eta_ini = y_hist.rightCols(t_ini);
  s.r_mu = Eigen::MatrixXd::NullaryExpr(kappa, n, [&] { return 0.3 * gauss(rng); });
  s.r_eta = simulate_lti(s.lti.sys, x, s.r_mu);
  s.config.t_ini = t_ini;
  s.config.n = n;
  s.config.Q = Eigen::MatrixXd::Identity(nu, nu);
  s.config.R = 0.01 * Eigen::MatrixXd::Identity(kappa, kappa);
  s.config.psi_gamma = 0.0;
  s.config.psi_sigma = 1e8;
  return s;
}

}  // namespace

TEST_CASE("fundamental-lemma exactness on a random observable system") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 3; ++trial) {
    auto s = make_exact_setup(rng, 3, 2, 2, 8);
    DdpcProblem prob = ddpc_assemble(s.part, s.mu_ini, s.eta_ini, s.r_mu, s.r_eta, s.config);
    QpSettings settings;
    settings.eps_abs = settings.eps_rel = 1e-11;
    settings.max_iter = 100000;
    DdpcPlan plan = ddpc_plan(prob, settings);
    Eigen::MatrixXd eta_oracle = simulate_lti(s.lti.sys, s.x_t0, plan.mu);
    CHECK((plan.eta - eta_oracle).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("slack norm decreases as psi_sigma grows") {
  std::mt19937_64 rng(31);
  auto s = make_exact_setup(rng, 2, 1, 1, 6);
  double prev_norm = 1e18;
  for (double psi : {1e2, 1e4, 1e6}) {
    DdpcConfig cfg = s.config;
    cfg.psi_sigma = psi;
    cfg.psi_gamma = 1e-6;
    DdpcProblem prob = ddpc_assemble(s.part, s.mu_ini, s.eta_ini, s.r_mu, s.r_eta, cfg);
    QpSettings settings;
    settings.eps_abs = settings.eps_rel = 1e-11;
    settings.max_iter = 100000;
    DdpcPlan plan = ddpc_plan(prob, settings);
    const double norm = plan.sigma.norm();
    CHECK(norm <= prev_norm + 1e-12);
    prev_norm = norm;
  }
  CHECK(prev_norm < 1e-6);
}

TEST_CASE("zero reference with zero history has the zero plan feasible") {
  std::mt19937_64 rng(41);
  auto s = make_exact_setup(rng, 2, 1, 1, 6);
  Eigen::MatrixXd zero_mu = Eigen::MatrixXd::Zero(1, s.config.t_ini);
  Eigen::MatrixXd zero_eta = Eigen::MatrixXd::Zero(1, s.config.t_ini);
  Eigen::MatrixXd r0_mu = Eigen::MatrixXd::Zero(1, s.config.n);
  Eigen::MatrixXd r0_eta = Eigen::MatrixXd::Zero(1, s.config.n);
  DdpcProblem prob = ddpc_assemble(s.part, zero_mu, zero_eta, r0_mu, r0_eta, s.config);
  QpSettings settings;
  settings.eps_abs = settings.eps_rel = 1e-10;
  DdpcPlan plan = ddpc_plan(prob, settings);
  CHECK(plan.mu.cwiseAbs().maxCoeff() < 1e-5);
  CHECK(plan.eta.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("duplicate Hankel columns leave the plan unchanged") {
  std::mt19937_64 rng(59);
  auto s = make_exact_setup(rng, 2, 1, 1, 6);
  DdpcProblem base = ddpc_assemble(s.part, s.mu_ini, s.eta_ini, s.r_mu, s.r_eta, s.config);
  Partition dup = s.part;
  auto append_col = [](Eigen::MatrixXd& m) {
    m.conservativeResize(Eigen::NoChange, m.cols() + 1);
    m.col(m.cols() - 1) = m.col(0);
  };
  append_col(dup.u_past);
  append_col(dup.u_future);
  append_col(dup.y_past);
  append_col(dup.y_future);
  DdpcProblem with_dup = ddpc_assemble(dup, s.mu_ini, s.eta_ini, s.r_mu, s.r_eta, s.config);
  QpSettings settings;
  settings.eps_abs = settings.eps_rel = 1e-11;
  settings.max_iter = 100000;
  DdpcPlan a = ddpc_plan(base, settings);
  DdpcPlan b = ddpc_plan(with_dup, settings);
  CHECK((a.mu - b.mu).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((a.eta - b.eta).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("infeasible injected bounds surface as SolverFailed") {
  std::mt19937_64 rng(61);
  auto s = make_exact_setup(rng, 2, 1, 1, 6);
  DdpcProblem prob = ddpc_assemble(s.part, s.mu_ini, s.eta_ini, s.r_mu, s.r_eta, s.config);
  prob.qp.l(0) = 1.0;
  prob.qp.u(0) = -1.0;
  CHECK_THROWS_AS(ddpc_plan(prob), Error);
}

TEST_CASE("warm-started repeat solve takes fewer iterations") {
  std::mt19937_64 rng(71);
  auto s = make_exact_setup(rng, 2, 2, 2, 8);
  DdpcConfig cfg = s.config;
  cfg.psi_gamma = 1e-4;
  cfg.psi_sigma = 1e4;
  DdpcProblem prob = ddpc_assemble(s.part, s.mu_ini, s.eta_ini, s.r_mu, s.r_eta, cfg);
  QpSettings settings;
  settings.adaptive_rho = false;
  QpSolver solver(prob.qp, settings);
  QpSolution first = solver.solve();
  REQUIRE(first.status == QpStatus::Solved);
  QpSolution second = solver.solve();
  REQUIRE(second.status == QpStatus::Solved);
  CHECK(second.iterations <= first.iterations);
}
