#include <doctest.h>

#include <random>

#include "hddpc/bezier.hpp"
#include "hddpc/errors.hpp"

using namespace hddpc;

namespace {

BezierCurve make_curve(std::initializer_list<double> pts, double duration) {
  BezierCurve c;
  c.coefficients.resize(static_cast<Eigen::Index>(pts.size()), 1);
  Eigen::Index i = 0;
  for (double v : pts) c.coefficients(i++, 0) = v;
  c.duration = duration;
  return c;
}

}  // namespace

TEST_CASE("bez constant curve") {
  BezierCurve c = make_curve({3.0, 3.0, 3.0}, 1.5);
  CHECK(bez(0.3, c)(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(bez(1.5, c)(0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("bez linear interpolation") {
  BezierCurve c = make_curve({0.0, 1.0}, 2.0);
  CHECK(bez(1.0, c)(0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("bez endpoint interpolation") {
  BezierCurve c = make_curve({0.2, -0.7, 1.3, 0.4}, 0.9);
  CHECK(bez(0.0, c)(0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(bez(0.9, c)(0) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("bez rejects out-of-domain times") {
  BezierCurve c = make_curve({0.0, 1.0}, 1.0);
  CHECK_THROWS_AS(bez(-0.1, c), Error);
  CHECK_THROWS_AS(bez(1.2, c), Error);
}

TEST_CASE("dbez of constant curve is zero") {
  BezierCurve c = make_curve({2.0, 2.0, 2.0, 2.0}, 1.0);
  CHECK(dbez(0.4, c)(0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("dbez linear slope") {
  BezierCurve c = make_curve({0.0, 1.0}, 2.0);
  for (double t : {0.0, 0.5, 1.7, 2.0}) {
    CHECK(dbez(t, c)(0) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("dbez duration scaling halves velocity at matched phase") {
  BezierCurve c1 = make_curve({0.1, -0.4, 0.8, 0.2}, 1.0);
  BezierCurve c2 = c1;
  c2.duration = 2.0;
  for (double tau : {0.0, 0.25, 0.8}) {
    CHECK(dbez(tau * c2.duration, c2)(0) ==
          doctest::Approx(0.5 * dbez(tau * c1.duration, c1)(0)).epsilon(1e-12));
  }
}

TEST_CASE("dbez matches central differences") {
  BezierCurve c;
  c.coefficients.resize(6, 2);
  c.coefficients << 0.0, 0.1, 0.2, -0.3, -0.1, 0.4, 0.5, 0.0, 0.3, 0.2, -0.2, 0.6;
  c.duration = 1.3;
  const double h = 1e-6;
  for (double tau : {0.1, 0.33, 0.5, 0.77, 0.9}) {
    const double t = tau * c.duration;
    Eigen::VectorXd fd = (bez(t + h, c) - bez(t - h, c)) / (2.0 * h);
    Eigen::VectorXd an = dbez(t, c);
    for (int i = 0; i < 2; ++i) {
      CHECK(an(i) == doctest::Approx(fd(i)).epsilon(1e-6));
    }
  }
}

TEST_CASE("ddbez matches second differences") {
  BezierCurve c;
  c.coefficients.resize(5, 1);
  c.coefficients << 0.0, 0.4, -0.2, 0.3, 0.1;
  c.duration = 0.8;
  const double h = 1e-5;
  for (double tau : {0.2, 0.5, 0.8}) {
    const double t = tau * c.duration;
    const double fd = (bez(t + h, c)(0) - 2.0 * bez(t, c)(0) + bez(t - h, c)(0)) / (h * h);
    CHECK(ddbez(t, c)(0) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("convex hull property") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    BezierCurve c;
    c.coefficients.resize(6, 1);
    for (int i = 0; i < 6; ++i) c.coefficients(i, 0) = dist(rng);
    c.duration = 1.0;
    const double lo = c.coefficients.minCoeff();
    const double hi = c.coefficients.maxCoeff();
    for (int k = 0; k <= 20; ++k) {
      const double v = bez(k / 20.0, c)(0);
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }
  }
}

TEST_CASE("evaluation is linear in the coefficients") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BezierCurve c1, c2, mix;
  c1.coefficients.resize(5, 1);
  c2.coefficients.resize(5, 1);
  for (int i = 0; i < 5; ++i) {
    c1.coefficients(i, 0) = dist(rng);
    c2.coefficients(i, 0) = dist(rng);
  }
  c1.duration = c2.duration = 1.0;
  const double a = 0.7, b = -1.3;
  mix.coefficients = a * c1.coefficients + b * c2.coefficients;
  mix.duration = 1.0;
  for (double t : {0.1, 0.45, 0.95}) {
    CHECK(bez(t, mix)(0) ==
          doctest::Approx(a * bez(t, c1)(0) + b * bez(t, c2)(0)).epsilon(1e-12));
  }
}

TEST_CASE("bernstein rows agree with evaluation") {
  BezierCurve c;
  c.coefficients.resize(6, 1);
  c.coefficients << 0.3, -0.1, 0.6, 0.2, -0.4, 0.5;
  c.duration = 1.1;
  for (double tau : {0.0, 0.2, 0.63, 1.0}) {
    const double via_row = bernstein_row(tau, 5) * c.coefficients.col(0);
    CHECK(via_row == doctest::Approx(bez(tau * c.duration, c)(0)).epsilon(1e-13));
    const double via_drow =
        (bernstein_derivative_row(tau, 5) * c.coefficients.col(0))(0, 0) / c.duration;
    CHECK(via_drow == doctest::Approx(dbez(tau * c.duration, c)(0)).epsilon(1e-12));
  }
}

TEST_CASE("fit recovers a line exactly") {
  std::vector<std::pair<double, Eigen::VectorXd>> samples;
  for (int k = 0; k <= 5; ++k) {
    const double tau = k / 5.0;
    Eigen::VectorXd v(1);
    v << 2.0 * tau - 0.5;
    samples.push_back({tau, v});
  }
  BezierFit f = fit(samples, 1);
  CHECK(f.coefficients(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.coefficients(1, 0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
}

TEST_CASE("fit round-trips a cubic") {
  BezierCurve c;
  c.coefficients.resize(4, 1);
  c.coefficients << 0.1, 0.9, -0.6, 0.4;
  c.duration = 1.0;
  std::vector<std::pair<double, Eigen::VectorXd>> samples;
  for (int k = 0; k < 10; ++k) {
    const double tau = k / 9.0;
    samples.push_back({tau, bez(tau, c)});
  }
  BezierFit f = fit(samples, 3);
  for (int i = 0; i < 4; ++i) {
    CHECK(f.coefficients(i, 0) == doctest::Approx(c.coefficients(i, 0)).epsilon(1e-9));
  }
}

TEST_CASE("fit rejects underdetermined sample sets") {
  std::vector<std::pair<double, Eigen::VectorXd>> samples;
  Eigen::VectorXd v(1);
  v << 0.0;
  samples.push_back({0.0, v});
  samples.push_back({1.0, v});
  CHECK_THROWS_AS(fit(samples, 3), Error);
}
