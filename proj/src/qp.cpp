#include "hddpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "hddpc/errors.hpp"
#include "hddpc/log.hpp"

namespace hddpc {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

void QpProblem::validate() const {
  const Eigen::Index n = P.rows();
  if (P.cols() != n || q.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "P/q dimensions inconsistent");
  }
  if (A.cols() != n || A.rows() != l.size() || A.rows() != u.size()) {
    throw Error(ErrorKind::ShapeMismatch, "A/l/u dimensions inconsistent");
  }
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (l(i) > u(i)) {
      throw Error(ErrorKind::ShapeMismatch, "lower bound exceeds upper bound at row " +
                                                std::to_string(i));
    }
  }
  Eigen::SparseMatrix<double> Pt = P.transpose();
  Eigen::SparseMatrix<double> diff = P - Pt;
  double asym = 0.0;
  double scale = 1e-30;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) {
      asym = std::max(asym, std::abs(it.value()));
    }
  }
  for (int k = 0; k < P.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(P, k); it; ++it) {
      scale = std::max(scale, std::abs(it.value()));
    }
  }
  if (asym > 1e-8 * scale) {
    throw Error(ErrorKind::ShapeMismatch, "P is not symmetric");
  }
  // PSD check through a regularized Cholesky-type factorization.
  Eigen::SparseMatrix<double> reg = P;
  Eigen::SparseMatrix<double> eye(n, n);
  eye.setIdentity();
  reg += (1e-9 * scale + 1e-12) * eye;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(reg);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < -1e-7 * scale) {
    throw Error(ErrorKind::ShapeMismatch, "P is not positive semidefinite");
  }
}

void QpProblem::dump(const std::string& path) const {
  std::ofstream f(path);
  if (!f.good()) throw Error(ErrorKind::IoError, "cannot open for writing: " + path);
  f.precision(17);
  auto write_sparse = [&](const char* name, const Eigen::SparseMatrix<double>& m) {
    f << "%%MatrixMarket matrix coordinate real general\n";
    f << "% " << name << "\n";
    f << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    for (int k = 0; k < m.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
        f << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
      }
    }
  };
  auto write_vector = [&](const char* name, const Eigen::VectorXd& v) {
    f << "%%MatrixMarket matrix array real general\n";
    f << "% " << name << "\n";
    f << v.size() << " 1\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) f << v(i) << "\n";
  };
  write_sparse("P", P);
  write_vector("q", q);
  write_sparse("A", A);
  write_vector("l", l);
  write_vector("u", u);
}

struct QpSolver::Impl {
  QpProblem prob;
  QpSettings settings;

  Eigen::Index n = 0;
  Eigen::Index m = 0;

  // Ruiz scalings: D (vars), E (constraints), and cost scaling c.
  Eigen::VectorXd d_scale;
  Eigen::VectorXd e_scale;
  double c_scale = 1.0;

  // Scaled data.
  Eigen::SparseMatrix<double> Ps, As;
  Eigen::VectorXd qs, ls, us;

  // Per-row penalty (scaled space).
  Eigen::VectorXd rho_vec;
  double rho_bar = 0.1;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> kkt_lu;
  bool factorized = false;

  // Iterates (scaled space).
  Eigen::VectorXd x, z, y;
  bool have_warm = false;

  Impl(QpProblem p, QpSettings s) : prob(std::move(p)), settings(s) {
    prob.validate();
    n = prob.num_vars();
    m = prob.num_constraints();
    scale_problem();
    set_rho(settings.rho);
    factorize();
    x = Eigen::VectorXd::Zero(n);
    z = Eigen::VectorXd::Zero(m);
    y = Eigen::VectorXd::Zero(m);
  }

  void scale_problem() {
    // Ruiz equilibration on [P A'; A 0].
    d_scale = Eigen::VectorXd::Ones(n);
    e_scale = Eigen::VectorXd::Ones(m);
    c_scale = 1.0;
    Ps = prob.P;
    As = prob.A;
    qs = prob.q;
    for (int iter = 0; iter < settings.scaling_iterations; ++iter) {
      Eigen::VectorXd col_norm_p = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd col_norm_a = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd row_norm_a = Eigen::VectorXd::Zero(m);
      for (int k = 0; k < Ps.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(Ps, k); it; ++it) {
          col_norm_p(it.col()) = std::max(col_norm_p(it.col()), std::abs(it.value()));
        }
      }
      for (int k = 0; k < As.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(As, k); it; ++it) {
          col_norm_a(it.col()) = std::max(col_norm_a(it.col()), std::abs(it.value()));
          row_norm_a(it.row()) = std::max(row_norm_a(it.row()), std::abs(it.value()));
        }
      }
      Eigen::VectorXd dv(n), ev(m);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = std::max(col_norm_p(i), col_norm_a(i));
        dv(i) = norm > 1e-12 ? 1.0 / std::sqrt(norm) : 1.0;
        dv(i) = std::clamp(dv(i), 1e-6, 1e6);
      }
      for (Eigen::Index i = 0; i < m; ++i) {
        ev(i) = row_norm_a(i) > 1e-12 ? 1.0 / std::sqrt(row_norm_a(i)) : 1.0;
        ev(i) = std::clamp(ev(i), 1e-6, 1e6);
      }
      Ps = dv.asDiagonal() * Ps * dv.asDiagonal();
      As = ev.asDiagonal() * As * dv.asDiagonal();
      qs = dv.asDiagonal() * qs;
      d_scale = d_scale.cwiseProduct(dv);
      e_scale = e_scale.cwiseProduct(ev);
      // Cost scaling keeps the quadratic and linear parts balanced.
      Eigen::VectorXd p_col = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < Ps.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(Ps, k); it; ++it) {
          p_col(it.col()) = std::max(p_col(it.col()), std::abs(it.value()));
        }
      }
      const double mean_p = p_col.size() > 0 ? p_col.mean() : 0.0;
      const double gamma = std::max(mean_p, inf_norm(qs));
      if (gamma > 1e-12) {
        const double cg = std::clamp(1.0 / gamma, 1e-6, 1e6);
        Ps *= cg;
        qs *= cg;
        c_scale *= cg;
      }
    }
    ls.resize(m);
    us.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      ls(i) = prob.l(i) <= -kInf ? -kInf : e_scale(i) * prob.l(i);
      us(i) = prob.u(i) >= kInf ? kInf : e_scale(i) * prob.u(i);
    }
  }

  void set_rho(double rho) {
    rho_bar = std::clamp(rho, 1e-6, 1e6);
    rho_vec.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const bool loose = ls(i) <= -kInf && us(i) >= kInf;
      const bool eq = ls(i) > -kInf && us(i) < kInf && (us(i) - ls(i)) < 1e-12;
      if (eq) {
        rho_vec(i) = rho_bar * 1e3;
      } else if (loose) {
        rho_vec(i) = rho_bar * 1e-6;
      } else {
        rho_vec(i) = rho_bar;
      }
    }
  }

  void factorize() {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(Ps.nonZeros() + 2 * As.nonZeros() + n + m);
    for (int k = 0; k < Ps.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(Ps, k); it; ++it) {
        trip.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, settings.sigma);
    for (int k = 0; k < As.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(As, k); it; ++it) {
        trip.emplace_back(n + it.row(), it.col(), it.value());
        trip.emplace_back(it.col(), n + it.row(), it.value());
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) trip.emplace_back(n + i, n + i, -1.0 / rho_vec(i));
    Eigen::SparseMatrix<double> kkt(n + m, n + m);
    kkt.setFromTriplets(trip.begin(), trip.end());
    kkt_lu.compute(kkt);
    factorized = kkt_lu.info() == Eigen::Success;
    if (!factorized) {
      log::error("KKT factorization failed (n=%ld m=%ld)", long(n), long(m));
    }
  }

  // Unscaled residual pieces for convergence checks.
  struct Residuals {
    double prim = 0.0, dual = 0.0;
    double prim_tol = 0.0, dual_tol = 0.0;
  };

  Residuals residuals(const Eigen::VectorXd& xs, const Eigen::VectorXd& zs,
                      const Eigen::VectorXd& ys) const {
    Eigen::VectorXd x_u = d_scale.cwiseProduct(xs);
    Eigen::VectorXd z_u = zs.cwiseQuotient(e_scale);
    Eigen::VectorXd y_u = e_scale.cwiseProduct(ys) / c_scale;
    Eigen::VectorXd ax = prob.A * x_u;
    Eigen::VectorXd px = prob.P * x_u;
    Eigen::VectorXd aty = prob.A.transpose() * y_u;
    Residuals r;
    r.prim = inf_norm(ax - z_u);
    r.dual = inf_norm(px + prob.q + aty);
    r.prim_tol = settings.eps_abs +
                 settings.eps_rel * std::max(inf_norm(ax), inf_norm(z_u));
    r.dual_tol = settings.eps_abs + settings.eps_rel * std::max({inf_norm(px), inf_norm(prob.q),
                                                                 inf_norm(aty)});
    return r;
  }

  bool primal_infeasibility(const Eigen::VectorXd& dy_scaled) const {
    Eigen::VectorXd dy = e_scale.cwiseProduct(dy_scaled) / c_scale;
    const double norm_dy = inf_norm(dy);
    if (norm_dy < 1e-14) return false;
    dy /= norm_dy;
    if (inf_norm(prob.A.transpose() * dy) > settings.eps_infeasible) return false;
    double support = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (dy(i) > 0) {
        if (prob.u(i) >= kInf) return false;
        support += prob.u(i) * dy(i);
      } else if (dy(i) < 0) {
        if (prob.l(i) <= -kInf) return false;
        support += prob.l(i) * dy(i);
      }
    }
    return support < -settings.eps_infeasible;
  }

  bool dual_infeasibility(const Eigen::VectorXd& dx_scaled) const {
    Eigen::VectorXd dx = d_scale.cwiseProduct(dx_scaled);
    const double norm_dx = inf_norm(dx);
    if (norm_dx < 1e-14) return false;
    dx /= norm_dx;
    if (inf_norm(prob.P * dx) > settings.eps_infeasible) return false;
    if (prob.q.dot(dx) > -settings.eps_infeasible) return false;
    Eigen::VectorXd adx = prob.A * dx;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (prob.u(i) < kInf && adx(i) > settings.eps_infeasible) return false;
      if (prob.l(i) > -kInf && adx(i) < -settings.eps_infeasible) return false;
    }
    return true;
  }

  void polish(QpSolution& sol) const {
    // Active-set refinement on the unscaled problem.
    std::vector<Eigen::Index> active_low, active_up;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (prob.l(i) > -kInf && sol.y(i) < -1e-10) active_low.push_back(i);
      else if (prob.u(i) < kInf && sol.y(i) > 1e-10) active_up.push_back(i);
    }
    const Eigen::Index ma = static_cast<Eigen::Index>(active_low.size() + active_up.size());
    Eigen::SparseMatrix<double, Eigen::RowMajor> a_rows = prob.A;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(n + ma);
    rhs.head(n) = -prob.q;
    for (int k = 0; k < prob.P.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(prob.P, k); it; ++it) {
        trip.emplace_back(it.row(), it.col(), it.value());
      }
    }
    const double reg = 1e-9;
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, reg);
    Eigen::Index row = n;
    auto add_row = [&](Eigen::Index ci, double bound) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a_rows, ci); it; ++it) {
        trip.emplace_back(row, it.col(), it.value());
        trip.emplace_back(it.col(), row, it.value());
      }
      trip.emplace_back(row, row, -reg);
      rhs(row) = bound;
      ++row;
    };
    for (Eigen::Index ci : active_low) add_row(ci, prob.l(ci));
    for (Eigen::Index ci : active_up) add_row(ci, prob.u(ci));
    Eigen::SparseMatrix<double> kkt(n + ma, n + ma);
    kkt.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(kkt);
    if (lu.info() != Eigen::Success) return;
    Eigen::VectorXd sol_vec = lu.solve(rhs);
    // One step of iterative refinement.
    Eigen::VectorXd resid = rhs - kkt * sol_vec;
    sol_vec += lu.solve(resid);
    Eigen::VectorXd x_new = sol_vec.head(n);
    Eigen::VectorXd y_new = Eigen::VectorXd::Zero(m);
    Eigen::Index idx = n;
    for (Eigen::Index ci : active_low) y_new(ci) = sol_vec(idx++);
    for (Eigen::Index ci : active_up) y_new(ci) = sol_vec(idx++);
    // Accept only if the polished point is at least as good on both residuals.
    Eigen::VectorXd ax = prob.A * x_new;
    Eigen::VectorXd viol = (prob.l - ax).cwiseMax(0.0) + (ax - prob.u).cwiseMax(0.0);
    const double prim = inf_norm(viol);
    const double dual = inf_norm(prob.P * x_new + prob.q + prob.A.transpose() * y_new);
    if (prim <= std::max(sol.primal_residual, 1e-15) + 1e-12 &&
        dual <= std::max(sol.dual_residual, 1e-15) + 1e-12) {
      sol.x = x_new;
      sol.y = y_new;
      sol.primal_residual = prim;
      sol.dual_residual = dual;
      sol.polished = true;
    }
  }

  QpSolution run() {
    QpSolution sol;
    if (!factorized) {
      sol.status = QpStatus::MaxIter;
      return sol;
    }
    if (!have_warm) {
      x.setZero();
      z.setZero();
      y.setZero();
    }
    Eigen::VectorXd x_prev, y_prev, z_tilde(m), x_tilde(n), rhs(n + m), kkt_sol(n + m);
    int iter = 0;
    for (iter = 1; iter <= settings.max_iter; ++iter) {
      x_prev = x;
      y_prev = y;
      rhs.head(n) = settings.sigma * x - qs;
      rhs.tail(m) = z - y.cwiseQuotient(rho_vec);
      kkt_sol = kkt_lu.solve(rhs);
      x_tilde = kkt_sol.head(n);
      Eigen::VectorXd nu = kkt_sol.tail(m);
      z_tilde = z + (nu - y).cwiseQuotient(rho_vec);
      x = settings.alpha * x_tilde + (1.0 - settings.alpha) * x;
      Eigen::VectorXd z_cand =
          settings.alpha * z_tilde + (1.0 - settings.alpha) * z + y.cwiseQuotient(rho_vec);
      Eigen::VectorXd z_new = z_cand.cwiseMax(ls).cwiseMin(us);
      y = y + rho_vec.cwiseProduct(settings.alpha * z_tilde + (1.0 - settings.alpha) * z - z_new);
      z = z_new;

      if (iter % settings.check_interval == 0 || iter == settings.max_iter) {
        Residuals r = residuals(x, z, y);
        if (r.prim <= r.prim_tol && r.dual <= r.dual_tol) {
          sol.status = QpStatus::Solved;
          break;
        }
        if (primal_infeasibility(y - y_prev)) {
          sol.status = QpStatus::PrimalInfeasible;
          break;
        }
        if (dual_infeasibility(x - x_prev)) {
          sol.status = QpStatus::DualInfeasible;
          break;
        }
        if (settings.adaptive_rho) {
          const double pr = r.prim / std::max(r.prim_tol, 1e-30);
          const double dr = r.dual / std::max(r.dual_tol, 1e-30);
          const double ratio = std::sqrt(pr / std::max(dr, 1e-30));
          if (ratio > 5.0 || ratio < 0.2) {
            set_rho(rho_bar * std::clamp(ratio, 1e-3, 1e3));
            factorize();
          }
        }
      }
    }
    sol.iterations = std::min(iter, settings.max_iter);
    // Unscale.
    sol.x = d_scale.cwiseProduct(x);
    sol.y = e_scale.cwiseProduct(y) / c_scale;
    Residuals r = residuals(x, z, y);
    sol.primal_residual = r.prim;
    sol.dual_residual = r.dual;
    if (sol.status == QpStatus::Solved && settings.polish) polish(sol);
    sol.objective = 0.5 * sol.x.dot(prob.P * sol.x) + prob.q.dot(sol.x);
    have_warm = true;  // iterates retained for the next solve
    return sol;
  }
};

QpSolver::QpSolver(QpProblem problem, QpSettings settings)
    : impl_(std::make_unique<Impl>(std::move(problem), settings)) {}

QpSolver::~QpSolver() = default;
QpSolver::QpSolver(QpSolver&&) noexcept = default;
QpSolver& QpSolver::operator=(QpSolver&&) noexcept = default;

void QpSolver::update_vectors(const Eigen::VectorXd& q, const Eigen::VectorXd& l,
                              const Eigen::VectorXd& u) {
  Impl& im = *impl_;
  if (q.size() != im.n || l.size() != im.m || u.size() != im.m) {
    throw Error(ErrorKind::ShapeMismatch, "update_vectors dimension mismatch");
  }
  for (Eigen::Index i = 0; i < im.m; ++i) {
    if (l(i) > u(i)) throw Error(ErrorKind::ShapeMismatch, "lower bound exceeds upper bound");
  }
  im.prob.q = q;
  im.prob.l = l;
  im.prob.u = u;
  im.qs = im.c_scale * im.d_scale.cwiseProduct(q);
  for (Eigen::Index i = 0; i < im.m; ++i) {
    im.ls(i) = l(i) <= -kInf ? -kInf : im.e_scale(i) * l(i);
    im.us(i) = u(i) >= kInf ? kInf : im.e_scale(i) * u(i);
  }
}

void QpSolver::warm_start(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Impl& im = *impl_;
  if (x.size() != im.n || y.size() != im.m) {
    throw Error(ErrorKind::ShapeMismatch, "warm_start dimension mismatch");
  }
  im.x = x.cwiseQuotient(im.d_scale);
  im.y = im.c_scale * y.cwiseQuotient(im.e_scale);
  Eigen::VectorXd ax = im.prob.A * x;
  for (Eigen::Index i = 0; i < im.m; ++i) {
    im.z(i) = im.e_scale(i) * std::clamp(ax(i), -kInf, kInf);
  }
  im.z = im.z.cwiseMax(im.ls).cwiseMin(im.us);
  im.have_warm = true;
}

QpSolution QpSolver::solve() { return impl_->run(); }

const QpProblem& QpSolver::problem() const { return impl_->prob; }

QpSolution solve(const QpProblem& problem, const QpSettings& settings) {
  QpSolver solver(problem, settings);
  return solver.solve();
}

}  // namespace hddpc
