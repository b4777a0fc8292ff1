#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "voi/decision_model.hpp"
#include "voi/errors.hpp"
#include "voi/prob.hpp"
#include "voi/quadrature.hpp"
#include "voi/smoothing.hpp"

using namespace voi;

namespace {

const SmootherMethod kMethods[] = {SmootherMethod::moving_average, SmootherMethod::linear, SmootherMethod::loess,
                                   SmootherMethod::kernel};

SmootherConfig with_method(SmootherMethod m) {
  SmootherConfig c;
  c.method = m;
  return c;
}

std::vector<double> uniform_draws(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(g);
  return v;
}

}  // namespace

TEST_CASE("every method reproduces a constant exactly") {
  const auto x = uniform_draws(300, -2, 5, 1);
  const auto x2 = uniform_draws(300, 10, 11, 2);
  const std::vector<double> y(300, 4.25);
  for (auto m : kMethods) {
    CAPTURE(to_string(m));
    const auto s1 = Smoother::fit(x, y, with_method(m));
    const auto s2 = Smoother::fit(x, x2, y, with_method(m));
    for (double q = -2; q <= 5; q += 0.37) {
      CHECK(s1.predict(q) == doctest::Approx(4.25).epsilon(1e-12));
      CHECK(s2.predict(q, 10.0 + (q + 2) / 7.0) == doctest::Approx(4.25).epsilon(1e-12));
    }
  }
}

TEST_CASE("linear method recovers a noiseless line") {
  const auto x = uniform_draws(200, 0, 10, 3);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3 * x[i] + 1;
  const auto s = Smoother::fit(x, y, with_method(SmootherMethod::linear));
  for (std::size_t i = 0; i < x.size(); i += 7) CHECK(std::abs(s.predict(x[i]) - y[i]) < 1e-10);
}

TEST_CASE("linear method equals ordinary least squares") {
  std::mt19937_64 g(4);
  std::normal_distribution<double> nd;
  const std::size_t n = 500;
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = nd(g);
    x2[i] = 3 + 2 * nd(g);
    y[i] = 1.5 - 0.7 * x1[i] + 0.2 * x2[i] + x1[i] * x1[i] + nd(g);
  }
  // Normal equations X'X b = X'y.
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd Y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = x1[i];
    X(i, 2) = x2[i];
    Y(i) = y[i];
  }
  const Eigen::VectorXd b = (X.transpose() * X).inverse() * (X.transpose() * Y);
  const auto s = Smoother::fit(x1, x2, y, with_method(SmootherMethod::linear));
  for (std::size_t i = 0; i < n; i += 11) {
    CHECK(s.predict(x1[i], x2[i]) == doctest::Approx(b(0) + b(1) * x1[i] + b(2) * x2[i]).epsilon(1e-9));
  }
  Eigen::MatrixXd X1 = X.leftCols(2);
  const Eigen::VectorXd b1 = (X1.transpose() * X1).inverse() * (X1.transpose() * Y);
  const auto s1 = Smoother::fit(x1, y, with_method(SmootherMethod::linear));
  CHECK(s1.predict(0.3) == doctest::Approx(b1(0) + b1(1) * 0.3).epsilon(1e-9));
}

TEST_CASE("loess recovers sin(x) from noisy samples") {
  const std::size_t n = 5000;
  const auto x = uniform_draws(n, 0, 2 * M_PI, 5);
  std::mt19937_64 g(6);
  std::normal_distribution<double> noise(0, 0.1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(x[i]) + noise(g);
  const auto s = Smoother::fit(x, y, {});
  double sse = 0;
  for (int i = 1; i <= 100; ++i) {
    const double q = 2 * M_PI * i / 101.0;
    sse += std::pow(s.predict(q) - std::sin(q), 2);
  }
  CHECK(std::sqrt(sse / 100) <= 0.05);
}

TEST_CASE("loess with degree 1 and span 1 reproduces a global linear fit") {
  const auto x = uniform_draws(400, -1, 4, 7);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -2 * x[i] + 0.5;
  SmootherConfig c;
  c.span = 1.0;
  c.degree = 1;
  const auto loess = Smoother::fit(x, y, c);
  const auto lin = Smoother::fit(x, y, with_method(SmootherMethod::linear));
  for (double q = -1; q <= 4; q += 0.05) CHECK(std::abs(loess.predict(q) - lin.predict(q)) < 1e-6);
}

TEST_CASE("noiseless linear data are interpolated at training points") {
  const auto x = uniform_draws(100, 0, 1, 8);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 5 * x[i] - 1;
  for (auto m : {SmootherMethod::linear, SmootherMethod::loess}) {
    const auto s = Smoother::fit(x, y, with_method(m));
    for (std::size_t i = 0; i < x.size(); i += 9) CHECK(s.predict(x[i]) == doctest::Approx(y[i]).epsilon(1e-9));
  }
}

TEST_CASE("queries outside the hull are clamped") {
  const auto x = uniform_draws(500, 2, 6, 9);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * x[i];
  for (auto m : kMethods) {
    const auto s = Smoother::fit(x, y, with_method(m));
    const auto [lo, hi] = s.range(0);
    const double w = hi - lo;
    CHECK(s.predict(hi + 0.1 * w) == s.predict(hi));
    CHECK(s.predict(lo - 0.1 * w) == s.predict(lo));
  }
}

TEST_CASE("results do not depend on the order of training rows") {
  const auto x = uniform_draws(400, 0, 3, 10);
  const auto x2 = uniform_draws(400, 0, 3, 11);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::cos(x[i]) * x2[i] + 0.1 * std::sin(37 * x[i] * x2[i]);
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(12));
  std::vector<double> px(x.size()), px2(x.size()), py(x.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    px[i] = x[perm[i]];
    px2[i] = x2[perm[i]];
    py[i] = y[perm[i]];
  }
  for (auto m : kMethods) {
    CAPTURE(to_string(m));
    const auto a = Smoother::fit(x, y, with_method(m));
    const auto b = Smoother::fit(px, py, with_method(m));
    const auto a2 = Smoother::fit(x, x2, y, with_method(m));
    const auto b2 = Smoother::fit(px, px2, py, with_method(m));
    for (double q = 0.05; q < 3; q += 0.3) {
      CHECK(a.predict(q) == doctest::Approx(b.predict(q)).epsilon(1e-9));
      CHECK(a2.predict(q, 3 - q) == doctest::Approx(b2.predict(q, 3 - q)).epsilon(1e-9));
    }
  }
}

TEST_CASE("moving average and kernel stay within the range of y") {
  const auto x = uniform_draws(300, 0, 1, 13);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] < 0.5 ? 0.0 : 1.0;
  for (auto m : {SmootherMethod::moving_average, SmootherMethod::kernel}) {
    const auto s = Smoother::fit(x, y, with_method(m));
    const auto s2 = Smoother::fit(x, uniform_draws(300, 0, 1, 14), y, with_method(m));
    for (double q = -0.2; q <= 1.2; q += 0.01) {
      CHECK(s.predict(q) >= 0.0);
      CHECK(s.predict(q) <= 1.0);
      CHECK(s2.predict(q, 1 - q) >= 0.0);
      CHECK(s2.predict(q, 1 - q) <= 1.0);
    }
  }
}

TEST_CASE("fit and predict errors") {
  const std::vector<double> few(19, 1.0);
  CHECK_THROWS_AS(Smoother::fit(few, few, {}), FitError);
  const std::vector<double> flat(50, 2.0);
  const auto y = uniform_draws(50, 0, 1, 15);
  CHECK_THROWS_AS(Smoother::fit(flat, y, {}), FitError);
  const auto x = uniform_draws(50, 0, 1, 16);
  std::vector<double> nan_y = y;
  nan_y[3] = std::nan("");
  CHECK_THROWS_AS(Smoother::fit(x, nan_y, {}), FitError);
  CHECK_THROWS_AS(Smoother::fit(std::vector<std::span<const double>>{x, x, x}, y, {}), FitError);
  const auto s = Smoother::fit(x, y, {});
  const std::vector<double> pt{0.1, 0.2};
  CHECK_THROWS_AS(s.predict(pt), DomainError);
  CHECK_THROWS_AS(s.predict(0.1, 0.2), DomainError);
}

TEST_CASE("configuration validation") {
  SmootherConfig c;
  c.span = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.span = 1.2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.bandwidth = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.degree = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_smoother_method("kernel") == SmootherMethod::kernel);
  CHECK_THROWS_AS(parse_smoother_method("gp"), ConfigError);
}

TEST_CASE("batch prediction matches pointwise prediction") {
  const auto x = uniform_draws(300, 0, 1, 17);
  const auto x2 = uniform_draws(300, 0, 1, 18);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * x2[i];
  const auto s = Smoother::fit(x, y, {});
  const auto s2 = Smoother::fit(x, x2, y, {});
  const auto b = s.predict_batch(x);
  const auto b2 = s2.predict_batch(x, x2);
  for (std::size_t i = 0; i < x.size(); i += 13) {
    CHECK(b[i] == s.predict(x[i]));
    CHECK(b2[i] == s2.predict(x[i], x2[i]));
  }
}

TEST_CASE("two-dimensional loess on a smooth surface") {
  const std::size_t n = 20000;
  const auto x1 = uniform_draws(n, 0, 1, 19);
  const auto x2 = uniform_draws(n, 4, 20, 20);
  std::mt19937_64 g(21);
  std::normal_distribution<double> noise(0, 0.05);
  auto f = [](double a, double b) { return std::sin(3 * a) - 0.01 * (b - 12 * (0.5 + a)) * (b - 12 * (0.5 + a)); };
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = f(x1[i], x2[i]) + noise(g);
  SmootherConfig c;
  c.span = 0.2;
  const auto s = Smoother::fit(x1, x2, y, c);
  double worst = 0;
  for (double a = 0.1; a <= 0.9; a += 0.1) {
    for (double b = 6; b <= 18; b += 1) worst = std::max(worst, std::abs(s.predict(a, b) - f(a, b)));
  }
  CHECK(worst < 0.1);
}

namespace {

struct WorkingExampleCurve {
  SampleTable table;
  WorkingExampleCurve() {
    const Problem p = working_example_discrete();
    table = evaluate_utilities(p, sample_epistemic(p, 100000, RandomSource(2)), RandomSource(2).split(2));
  }
  Smoother fit(SmootherMethod m) const { return Smoother::fit(table.column("M"), table.utility(0), with_method(m)); }
  // E[u(X, a1) | M = m] by quadrature over R1; CF enters linearly through its mean.
  static double exact(double m) {
    const auto r = DistributionSpec::lognormal(10.0, 1.0);
    const double loss = integrate([&](double x) { return pdf(r, x) * exceedance_expected_loss(m, x, 3e7); }, 0.0,
                                  INFINITY, 1e-9);
    return -loss - 13e6;
  }
};

const WorkingExampleCurve& curve() {
  static const WorkingExampleCurve c;
  return c;
}

// Central 90% of M ~ N(7.5, 1).
constexpr double kCentralLo = 7.5 - 1.645, kCentralHi = 7.5 + 1.645;

double max_gap(const Smoother& a, const Smoother& b) {
  double worst = 0;
  for (double q = kCentralLo; q <= kCentralHi; q += 0.05) worst = std::max(worst, std::abs(a.predict(q) - b.predict(q)));
  return worst;
}

}  // namespace

TEST_CASE("loess follows the exact conditional expected utility on the working example") {
  const auto lo = curve().fit(SmootherMethod::loess);
  for (double q = kCentralLo; q <= kCentralHi; q += 0.05) CHECK(std::abs(lo.predict(q) - WorkingExampleCurve::exact(q)) < 0.3e6);
}

// Known deviation: the Gaussian kernel at the rule-of-thumb bandwidth carries
// about 0.3e6 of local noise near the upper end of the central range.
TEST_CASE("loess, kernel and moving average agree on the working example" * doctest::may_fail()) {
  const auto lo = curve().fit(SmootherMethod::loess);
  CHECK(max_gap(lo, curve().fit(SmootherMethod::kernel)) < 0.3e6);
  CHECK(max_gap(lo, curve().fit(SmootherMethod::moving_average)) < 0.3e6);
}

// Known deviation: a single global line cannot follow the convex curve.
TEST_CASE("loess and global linear regression agree on the working example" * doctest::should_fail()) {
  CHECK(max_gap(curve().fit(SmootherMethod::loess), curve().fit(SmootherMethod::linear)) < 0.3e6);
}
