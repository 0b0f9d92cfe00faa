#include "hddpc/ddpc.hpp"

#include <vector>

#include "hddpc/errors.hpp"

namespace hddpc {

Eigen::MatrixXd simulate_lti(const LtiSystem& sys, const Eigen::VectorXd& x0,
                             const Eigen::MatrixXd& inputs) {
  const Eigen::Index beta = sys.A.rows();
  const Eigen::Index kappa = sys.B.cols();
  const Eigen::Index nu = sys.M.rows();
  if (sys.A.cols() != beta || sys.B.rows() != beta || sys.M.cols() != beta ||
      sys.D.rows() != nu || sys.D.cols() != kappa || x0.size() != beta ||
      inputs.rows() != kappa) {
    throw Error(ErrorKind::ShapeMismatch, "LTI system dimensions inconsistent");
  }
  const Eigen::Index T = inputs.cols();
  Eigen::MatrixXd outputs(nu, T);
  Eigen::VectorXd x = x0;
  for (Eigen::Index t = 0; t < T; ++t) {
    outputs.col(t) = sys.M * x + sys.D * inputs.col(t);
    x = sys.A * x + sys.B * inputs.col(t);
  }
  return outputs;
}

DdpcProblem ddpc_assemble(const Partition& hankels, const Eigen::MatrixXd& mu_ini,
                          const Eigen::MatrixXd& eta_ini, const Eigen::MatrixXd& r_mu,
                          const Eigen::MatrixXd& r_eta, const DdpcConfig& config) {
  const int t_ini = config.t_ini;
  const int n = config.n;
  const int L = t_ini + n;
  const Eigen::Index cols = hankels.u_past.cols();
  if (hankels.u_future.cols() != cols || hankels.y_past.cols() != cols ||
      hankels.y_future.cols() != cols) {
    throw Error(ErrorKind::ShapeMismatch, "Hankel blocks have differing column counts");
  }
  if (hankels.u_past.rows() % t_ini != 0 || hankels.y_past.rows() % t_ini != 0) {
    throw Error(ErrorKind::ShapeMismatch, "past blocks not divisible by t_ini");
  }
  const int kappa = static_cast<int>(hankels.u_past.rows()) / t_ini;
  const int nu = static_cast<int>(hankels.y_past.rows()) / t_ini;
  if (hankels.u_future.rows() != kappa * n || hankels.y_future.rows() != nu * n) {
    throw Error(ErrorKind::ShapeMismatch, "future blocks do not match (kappa, nu, n)");
  }
  if (mu_ini.rows() != kappa || mu_ini.cols() != t_ini || eta_ini.rows() != nu ||
      eta_ini.cols() != t_ini) {
    throw Error(ErrorKind::ShapeMismatch, "history does not match (kappa, nu, t_ini)");
  }
  if (r_mu.rows() != kappa || r_mu.cols() != n || r_eta.rows() != nu || r_eta.cols() != n) {
    throw Error(ErrorKind::ShapeMismatch, "references do not match (kappa, nu, n)");
  }

  DdpcProblem out;
  out.kappa = kappa;
  out.nu = nu;
  out.t_ini = t_ini;
  out.n = n;
  out.columns = cols;

  const Eigen::Index n_sigma = static_cast<Eigen::Index>(kappa + nu) * L;
  const Eigen::Index n_mu = static_cast<Eigen::Index>(kappa) * n;
  const Eigen::Index n_eta = static_cast<Eigen::Index>(nu) * n;
  const Eigen::Index n_vars = cols + n_sigma + n_mu + n_eta;

  const Eigen::Index sigma0 = out.sigma_offset();
  const Eigen::Index mu0 = out.mu_offset();
  const Eigen::Index eta0 = out.eta_offset();

  std::vector<Eigen::Triplet<double>> pt, at;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n_vars);

  // Cost: output tracking, input tracking, gamma and sigma penalties.
  for (int k = 0; k < n; ++k) {
    for (int a = 0; a < nu; ++a) {
      for (int b = 0; b < nu; ++b) {
        const double w = config.Q(a, b);
        if (w != 0.0) pt.emplace_back(eta0 + nu * k + a, eta0 + nu * k + b, 2.0 * w);
      }
      for (int b = 0; b < nu; ++b) q(eta0 + nu * k + a) -= 2.0 * config.Q(a, b) * r_eta(b, k);
    }
    for (int a = 0; a < kappa; ++a) {
      for (int b = 0; b < kappa; ++b) {
        const double w = config.R(a, b);
        if (w != 0.0) pt.emplace_back(mu0 + kappa * k + a, mu0 + kappa * k + b, 2.0 * w);
      }
      for (int b = 0; b < kappa; ++b) q(mu0 + kappa * k + a) -= 2.0 * config.R(a, b) * r_mu(b, k);
    }
  }
  for (Eigen::Index i = 0; i < cols; ++i) {
    if (config.psi_gamma != 0.0) pt.emplace_back(i, i, 2.0 * config.psi_gamma);
  }
  for (Eigen::Index i = 0; i < n_sigma; ++i) {
    pt.emplace_back(sigma0 + i, sigma0 + i, 2.0 * config.psi_sigma);
  }

  // Equality rows: stacked Hankel * gamma + sigma = (mu_ini; mu; eta_ini; eta).
  const Eigen::Index n_eq = n_sigma;
  const bool has_bounds = config.input_lower.size() == kappa && config.input_upper.size() == kappa;
  const Eigen::Index n_rows = n_eq + (has_bounds ? n_mu : 0);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(n_rows);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_rows);

  auto add_hankel_rows = [&](const Eigen::MatrixXd& block, Eigen::Index row0) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        const double v = block(r, c);
        if (v != 0.0) at.emplace_back(row0 + r, c, v);
      }
    }
  };
  Eigen::Index row = 0;
  add_hankel_rows(hankels.u_past, row);
  for (int k = 0; k < t_ini; ++k) {
    for (int a = 0; a < kappa; ++a) {
      at.emplace_back(row, sigma0 + row, 1.0);
      l(row) = u(row) = mu_ini(a, k);
      ++row;
    }
  }
  add_hankel_rows(hankels.u_future, row);
  for (int k = 0; k < n; ++k) {
    for (int a = 0; a < kappa; ++a) {
      at.emplace_back(row, sigma0 + row, 1.0);
      at.emplace_back(row, mu0 + kappa * k + a, -1.0);
      ++row;
    }
  }
  add_hankel_rows(hankels.y_past, row);
  for (int k = 0; k < t_ini; ++k) {
    for (int a = 0; a < nu; ++a) {
      at.emplace_back(row, sigma0 + row, 1.0);
      l(row) = u(row) = eta_ini(a, k);
      ++row;
    }
  }
  add_hankel_rows(hankels.y_future, row);
  for (int k = 0; k < n; ++k) {
    for (int a = 0; a < nu; ++a) {
      at.emplace_back(row, sigma0 + row, 1.0);
      at.emplace_back(row, eta0 + nu * k + a, -1.0);
      ++row;
    }
  }
  if (has_bounds) {
    for (int k = 0; k < n; ++k) {
      for (int a = 0; a < kappa; ++a) {
        at.emplace_back(row, mu0 + kappa * k + a, 1.0);
        l(row) = config.input_lower(a);
        u(row) = config.input_upper(a);
        ++row;
      }
    }
  }

  out.qp.P.resize(n_vars, n_vars);
  out.qp.P.setFromTriplets(pt.begin(), pt.end());
  out.qp.A.resize(n_rows, n_vars);
  out.qp.A.setFromTriplets(at.begin(), at.end());
  out.qp.q = q;
  out.qp.l = l;
  out.qp.u = u;
  return out;
}

DdpcPlan ddpc_plan(const DdpcProblem& problem, const QpSettings& settings) {
  QpSolution sol;
  try {
    sol = solve(problem.qp, settings);
  } catch (const Error& e) {
    throw Error(ErrorKind::SolverFailed, e.what());
  }
  if (sol.status != QpStatus::Solved) {
    throw Error(ErrorKind::SolverFailed, to_string(sol.status));
  }
  DdpcPlan plan;
  plan.diagnostics = sol;
  plan.gamma = sol.x.segment(problem.gamma_offset(), problem.columns);
  plan.sigma = sol.x.segment(problem.sigma_offset(),
                             static_cast<Eigen::Index>(problem.kappa + problem.nu) *
                                 (problem.t_ini + problem.n));
  plan.mu.resize(problem.kappa, problem.n);
  plan.eta.resize(problem.nu, problem.n);
  for (int k = 0; k < problem.n; ++k) {
    for (int a = 0; a < problem.kappa; ++a) {
      plan.mu(a, k) = sol.x(problem.mu_offset() + problem.kappa * k + a);
    }
    for (int a = 0; a < problem.nu; ++a) {
      plan.eta(a, k) = sol.x(problem.eta_offset() + problem.nu * k + a);
    }
  }
  return plan;
}

}  // namespace hddpc
