#include "hddpc/bezier.hpp"

#include <vector>

#include <Eigen/Dense>

#include "hddpc/errors.hpp"

namespace hddpc {

namespace {

// de Casteljau over the control-point rows; numerically stable for any tau.
Eigen::VectorXd de_casteljau(const Eigen::MatrixXd& pts, double tau) {
  Eigen::MatrixXd work = pts;
  const int n = static_cast<int>(pts.rows());
  for (int level = n - 1; level > 0; --level) {
    for (int i = 0; i < level; ++i) {
      work.row(i) = (1.0 - tau) * work.row(i) + tau * work.row(i + 1);
    }
  }
  return work.row(0).transpose();
}

void check_domain(double t, const BezierCurve& curve) {
  if (curve.duration <= 0.0) throw Error(ErrorKind::OutOfDomain, "nonpositive duration");
  const double eps = 1e-12 * std::max(1.0, curve.duration);
  if (t < -eps || t > curve.duration + eps) {
    throw Error(ErrorKind::OutOfDomain, "t outside [0, duration]");
  }
}

Eigen::MatrixXd forward_difference(const Eigen::MatrixXd& pts) {
  return pts.bottomRows(pts.rows() - 1) - pts.topRows(pts.rows() - 1);
}

}  // namespace

Eigen::VectorXd bez(double t, const BezierCurve& curve) {
  check_domain(t, curve);
  return de_casteljau(curve.coefficients, t / curve.duration);
}

Eigen::VectorXd dbez(double t, const BezierCurve& curve) {
  check_domain(t, curve);
  const int deg = curve.degree();
  if (deg == 0) return Eigen::VectorXd::Zero(curve.dim());
  Eigen::MatrixXd diff = forward_difference(curve.coefficients);
  return (deg / curve.duration) * de_casteljau(diff, t / curve.duration);
}

Eigen::VectorXd ddbez(double t, const BezierCurve& curve) {
  check_domain(t, curve);
  const int deg = curve.degree();
  if (deg <= 1) return Eigen::VectorXd::Zero(curve.dim());
  Eigen::MatrixXd diff2 = forward_difference(forward_difference(curve.coefficients));
  const double scale = static_cast<double>(deg) * (deg - 1) / (curve.duration * curve.duration);
  return scale * de_casteljau(diff2, t / curve.duration);
}

Eigen::RowVectorXd bernstein_row(double tau, int degree) {
  // Triangular recurrence; exact at the endpoints.
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(degree + 1);
  row(0) = 1.0;
  for (int j = 1; j <= degree; ++j) {
    double saved = 0.0;
    for (int k = 0; k < j; ++k) {
      const double tmp = row(k);
      row(k) = saved + (1.0 - tau) * tmp;
      saved = tau * tmp;
    }
    row(j) = saved;
  }
  return row;
}

Eigen::RowVectorXd bernstein_derivative_row(double tau, int degree) {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(degree + 1);
  if (degree == 0) return out;
  Eigen::RowVectorXd lower = bernstein_row(tau, degree - 1);
  // d/dtau Bez = deg * sum_i (a_{i+1} - a_i) B_{i,deg-1}
  for (int i = 0; i < degree; ++i) {
    out(i) -= degree * lower(i);
    out(i + 1) += degree * lower(i);
  }
  return out;
}

BezierFit fit(const std::vector<std::pair<double, Eigen::VectorXd>>& samples, int degree) {
  const int m = static_cast<int>(samples.size());
  if (m < degree + 1) {
    throw Error(ErrorKind::RankDeficientBasis, "fewer samples than control points");
  }
  const int dim = static_cast<int>(samples.front().second.size());
  Eigen::MatrixXd basis(m, degree + 1);
  Eigen::MatrixXd rhs(m, dim);
  for (int k = 0; k < m; ++k) {
    basis.row(k) = bernstein_row(samples[k].first, degree);
    rhs.row(k) = samples[k].second.transpose();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  if (qr.rank() < degree + 1) {
    throw Error(ErrorKind::RankDeficientBasis, "basis matrix is rank deficient");
  }
  BezierFit result;
  result.coefficients = qr.solve(rhs);
  result.residual = (basis * result.coefficients - rhs).norm();
  return result;
}

}  // namespace hddpc
