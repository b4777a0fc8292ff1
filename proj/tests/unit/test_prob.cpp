#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "oracles.hpp"
#include "voi/errors.hpp"
#include "voi/parallel.hpp"
#include "voi/prob.hpp"
#include "voi/quadrature.hpp"

using namespace voi;

namespace {

std::vector<DistributionSpec> all_specs() {
  return {DistributionSpec::gumbel(7.5, 1.0), DistributionSpec::gumbel(-2.0, 3.0),
          DistributionSpec::normal(7.5, 1.0), DistributionSpec::lognormal(3e7, 1e7),
          DistributionSpec::lognormal(10.0, 1.0), DistributionSpec::uniform(4.0, 20.0)};
}

double sample_mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sample_std(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

TEST_CASE("gumbel density and cdf at the location") {
  const auto g = DistributionSpec::gumbel(7.5);
  CHECK(pdf(g, 7.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(cdf(g, 7.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(cdf(DistributionSpec::normal(7.5, 1.0), 7.5) == doctest::Approx(0.5));
}

TEST_CASE("gumbel mean is location plus Euler gamma by quadrature") {
  const auto g = DistributionSpec::gumbel(7.5);
  const double m = integrate([&](double x) { return x * pdf(g, x); }, -INFINITY, INFINITY);
  CHECK(m == doctest::Approx(7.5 + kEulerGamma).epsilon(1e-9));
  CHECK(mean(g) == doctest::Approx(7.5 + kEulerGamma).epsilon(1e-14));
}

TEST_CASE("lognormal density normalizes and has the requested first moment") {
  const auto d = DistributionSpec::lognormal(3e7, 1e7);
  const double mass = integrate([&](double x) { return pdf(d, x); }, 0.0, INFINITY);
  const double m1 = integrate([&](double x) { return x * pdf(d, x); }, 0.0, INFINITY);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m1 == doctest::Approx(3e7).epsilon(1e-8));
}

TEST_CASE("every density integrates to one over its support") {
  for (const auto& d : all_specs()) {
    CAPTURE(to_string(d.kind()));
    const double mass = integrate([&](double x) { return pdf(d, x); }, support_lower(d), support_upper(d));
    CHECK(std::abs(mass - 1.0) < 1e-8);
  }
}

TEST_CASE("quantile inverts cdf on (0.001, 0.999)") {
  for (const auto& d : all_specs()) {
    CAPTURE(to_string(d.kind()));
    for (double p = 0.001; p < 0.999; p += 0.00997) {
      CHECK(std::abs(cdf(d, quantile(d, p)) - p) < 1e-8);
    }
  }
}

TEST_CASE("quantile outside (0, 1) is a domain error") {
  const auto d = DistributionSpec::normal(0, 1);
  CHECK_THROWS_AS(quantile(d, 0.0), DomainError);
  CHECK_THROWS_AS(quantile(d, 1.0), DomainError);
  CHECK_THROWS_AS(quantile(d, -0.5), DomainError);
  CHECK_THROWS_AS(quantile(d, std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("cdf is monotone") {
  for (const auto& d : all_specs()) {
    double prev = 0.0;
    const double lo = quantile(d, 1e-6), hi = quantile(d, 1 - 1e-6);
    for (int i = 0; i <= 500; ++i) {
      const double c = cdf(d, lo + (hi - lo) * i / 500.0);
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("invalid parameters are rejected at construction") {
  CHECK_THROWS_AS(DistributionSpec::gumbel(0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::normal(0.0, -1.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::lognormal(-1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::lognormal(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::uniform(2.0, 2.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::normal(std::numeric_limits<double>::infinity(), 1.0), ConfigError);
  CHECK_THROWS_AS(parse_distribution_kind("beta"), ConfigError);
}

TEST_CASE("lognormal moment matching round-trips") {
  for (auto [m, s] : {std::pair{3e7, 1e7}, std::pair{10.0, 1.0}, std::pair{1.0, 0.1}, std::pair{5.0, 20.0}}) {
    const auto d = DistributionSpec::lognormal(m, s);
    const double mu = d.log_mu(), sg = d.log_sigma();
    const double m2 = std::exp(mu + 0.5 * sg * sg);
    const double s2 = m2 * std::sqrt(std::expm1(sg * sg));
    CHECK(std::abs(m2 / m - 1) < 1e-12);
    CHECK(std::abs(s2 / s - 1) < 1e-12);
  }
}

TEST_CASE("gumbel sample mean") {
  RandomSource src(7);
  const auto v = sample(DistributionSpec::gumbel(7.5), 1000000, src);
  CHECK(std::abs(sample_mean(v) - 8.07721) < 0.01);
}

TEST_CASE("lognormal sample standard deviation") {
  RandomSource src(11);
  const auto v = sample(DistributionSpec::lognormal(10.0, 1.0), 1000000, src);
  CHECK(std::abs(sample_std(v) - 1.0) < 0.01);
}

TEST_CASE("sampling is reproducible and independent of thread count") {
  const auto d = DistributionSpec::normal(0, 1);
  RandomSource a(5, 3), b(5, 3);
  const unsigned before = thread_count();
  set_thread_count(1);
  const auto x = sample(d, 50000, a);
  set_thread_count(4);
  const auto y = sample(d, 50000, b);
  set_thread_count(before);
  CHECK(x == y);
  CHECK(a.position() == 50000);
}

TEST_CASE("random streams") {
  RandomSource s(1);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = s.uniform_at(i);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
  CHECK(s.split(1).uniform_at(0) != s.split(2).uniform_at(0));
  CHECK(s.split(1).uniform_at(0) == RandomSource(1).split(1).uniform_at(0));
  CHECK(RandomSource(1).uniform_at(0) != RandomSource(2).uniform_at(0));
  RandomSource t(1);
  t.skip(5);
  CHECK(t.uniform() == s.uniform_at(5));
}

TEST_CASE("standard normal helpers") {
  CHECK(standard_normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(standard_normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(standard_normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(standard_normal_cdf(-3.0) == doctest::Approx(oracle::Phi(-3.0)).epsilon(1e-12));
}

TEST_CASE("quadrature basics") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, INFINITY) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(integrate([](double x) { return oracle::phi(x); }, -INFINITY, INFINITY) - 1.0) < 1e-10);
}

TEST_CASE("quadrature reports non-convergence with its best estimate") {
  QuadratureOptions o;
  o.max_intervals = 3;
  o.rel_tol = 1e-14;
  try {
    integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, o);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::isfinite(e.best_estimate()));
  }
}
