#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

// Sparse convex QP solver of the operator-splitting (ADMM) family:
//
//   minimize    0.5 x'Px + q'x
//   subject to  l <= Ax <= u        (equalities via l == u)
//
// with Ruiz equilibration, optional active-set polish, warm starting, and
// cached factorizations for receding-horizon reuse (only q, l, u change).

namespace hddpc {

constexpr double kInf = 1e30;

struct QpProblem {
  Eigen::SparseMatrix<double> P;  // symmetric PSD, n x n
  Eigen::VectorXd q;              // n
  Eigen::SparseMatrix<double> A;  // m x n
  Eigen::VectorXd l;              // m
  Eigen::VectorXd u;              // m
  std::vector<std::string> variable_names;  // optional, for diagnostics

  Eigen::Index num_vars() const { return q.size(); }
  Eigen::Index num_constraints() const { return l.size(); }

  // Checks symmetry, shapes, l <= u, and PSD-ness of P (Cholesky of P + eps I).
  // Throws Error(ShapeMismatch) on violation.
  void validate() const;

  // Matrix-market-style text dump for offline debugging.
  void dump(const std::string& path) const;
};

enum class QpStatus { Solved, MaxIter, PrimalInfeasible, DualInfeasible };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Solved: return "Solved";
    case QpStatus::MaxIter: return "MaxIter";
    case QpStatus::PrimalInfeasible: return "PrimalInfeasible";
    case QpStatus::DualInfeasible: return "DualInfeasible";
  }
  return "Unknown";
}

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  QpStatus status = QpStatus::MaxIter;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  bool polished = false;
};

struct QpSettings {
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int max_iter = 20000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  bool polish = true;
  bool adaptive_rho = true;
  double eps_infeasible = 1e-7;
  int check_interval = 25;
  int scaling_iterations = 10;
};

// Reusable solver: factorizations survive across solves when only the
// vectors q, l, u change. A single instance is not safe for concurrent use.
class QpSolver {
 public:
  QpSolver(QpProblem problem, QpSettings settings);
  ~QpSolver();
  QpSolver(QpSolver&&) noexcept;
  QpSolver& operator=(QpSolver&&) noexcept;

  void update_vectors(const Eigen::VectorXd& q, const Eigen::VectorXd& l,
                      const Eigen::VectorXd& u);
  void warm_start(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

  QpSolution solve();

  const QpProblem& problem() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper.
QpSolution solve(const QpProblem& problem, const QpSettings& settings = {});

}  // namespace hddpc
