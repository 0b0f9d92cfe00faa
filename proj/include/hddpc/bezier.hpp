#pragma once

#include <Eigen/Core>

// Bezier curves over a fixed duration. Control points live in the rows of
// the coefficient matrix (degree+1 rows, one column per output dimension).
// Evaluation uses de Casteljau recursion; the Bernstein basis rows exported
// here are what the planner uses to keep its curve constraints linear.

namespace hddpc {

struct BezierCurve {
  Eigen::MatrixXd coefficients;  // (degree+1) x dim control points
  double duration = 1.0;         // seconds

  int degree() const { return static_cast<int>(coefficients.rows()) - 1; }
  int dim() const { return static_cast<int>(coefficients.cols()); }
};

// Curve value at time t in [0, duration].
Eigen::VectorXd bez(double t, const BezierCurve& curve);

// Time derivative at t in [0, duration].
Eigen::VectorXd dbez(double t, const BezierCurve& curve);

// Second time derivative at t in [0, duration].
Eigen::VectorXd ddbez(double t, const BezierCurve& curve);

// Bernstein basis values B_{i,degree}(tau) for tau in [0,1].
Eigen::RowVectorXd bernstein_row(double tau, int degree);

// Row g such that g * alpha_column = d/dtau Bez(tau); the time derivative is
// this divided by the curve duration.
Eigen::RowVectorXd bernstein_derivative_row(double tau, int degree);

struct BezierFit {
  Eigen::MatrixXd coefficients;  // (degree+1) x dim
  double residual = 0.0;         // Frobenius norm of the LS residual
};

// Least-squares Bernstein fit of samples (tau_k in [0,1], value vector).
BezierFit fit(const std::vector<std::pair<double, Eigen::VectorXd>>& samples, int degree);

}  // namespace hddpc
