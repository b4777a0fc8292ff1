#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "voi/errors.hpp"
#include "voi/rare_event.hpp"

using namespace voi;

namespace {

std::vector<FactorSpec> two_normals() {
  return {{"X1", DistributionSpec::normal(0, 1), FactorClass::epistemic},
          {"X2", DistributionSpec::normal(0, 1), FactorClass::epistemic}};
}

RareEventProblem single_decision(SampleTable samples, double p_f) {
  RareEventProblem p;
  p.factors = two_normals();
  p.p_failure = {p_f};
  p.u_failure = {-10};
  p.u_survival = {0};
  p.failure_samples = std::move(samples);
  return p;
}

// Two decisions; the first fails when X1 - X2 > 2, the second with
// probability 0.05 regardless of the inputs.
RareEventProblem quadrature_toy() {
  const auto f1 = oracle::rejection_samples([](double x1, double x2) { return x1 - x2 > 2; }, 20000, 1, 31);
  auto f2 = oracle::rejection_samples([](double, double) { return true; }, 20000, 2, 32);
  RareEventProblem p;
  p.factors = two_normals();
  p.p_failure = {oracle::Phi(-2 / std::sqrt(2.0)), 0.05};
  p.u_failure = {-10, -8};
  p.u_survival = {0, -1};
  p.failure_samples = oracle::stack_rows(f1, f2);
  return p;
}

}  // namespace

TEST_CASE("rare-event mixture arithmetic") {
  CHECK(expected_utility_rare(0.1, -10, 0) == doctest::Approx(-1.0));
  CHECK(expected_utility_rare(0.0, -10, 3) == 3.0);
  CHECK(expected_utility_rare(1.0, -10, 3) == -10.0);
  CHECK_THROWS_AS(expected_utility_rare(1.5, -10, 0), DomainError);
  CHECK_THROWS_AS(expected_utility_rare(-0.1, -10, 0), DomainError);
}

TEST_CASE("rare-event mixture stays between the two utilities") {
  for (double u1 : {-10.0, -1.0, 0.0, 4.0}) {
    for (double u0 : {-3.0, 0.0, 2.5}) {
      for (double p = 0; p <= 1.0; p += 0.05) {
        const double v = expected_utility_rare(p, u1, u0);
        CHECK(v >= std::min(u0, u1) - 1e-12);
        CHECK(v <= std::max(u0, u1) + 1e-12);
      }
    }
  }
}

TEST_CASE("conditional failure probability of a deterministic tail event") {
  const double q95 = 1.6448536269514722, q975 = 1.959963984540054;
  const auto s = oracle::rejection_samples([&](double x1, double) { return x1 > q95; }, 10000, 1, 5);
  const auto p = single_decision(s, 0.05);
  CHECK(conditional_failure_probability(p, "X1", q975) >= 0.9);
  CHECK(conditional_failure_probability(p, "X1", 0.0) < 0.01);
}

TEST_CASE("conditional failure probability of a Gaussian sum") {
  const auto s = oracle::rejection_samples([](double x1, double x2) { return x1 + x2 > 3; }, 10000, 1, 6);
  const auto p = single_decision(s, oracle::Phi(-3 / std::sqrt(2.0)));
  const ConditionalFailureModel m(p, "X1");
  CHECK_FALSE(m.warning().has_value());
  for (double x = 1.0; x <= 3.0 + 1e-9; x += 0.1) {
    CAPTURE(x);
    CHECK(std::abs(m(x) - oracle::Phi(x - 3)) < 0.02);
  }
}

TEST_CASE("independent factor gives a flat failure profile") {
  const double q95 = 1.6448536269514722;
  const auto s = oracle::rejection_samples([&](double x1, double) { return x1 > q95; }, 10000, 1, 7);
  const auto p = single_decision(s, 0.05);
  const ConditionalFailureModel m(p, "X2");
  double worst = 0;
  for (double x = -2.0; x <= 2.0 + 1e-9; x += 0.05) worst = std::max(worst, std::abs(m(x) - 0.05));
  CHECK(worst < 0.15 * 0.05);
}

TEST_CASE("averaging over the prior recovers the failure probability") {
  const double pf = oracle::Phi(-3 / std::sqrt(2.0));
  const auto s = oracle::rejection_samples([](double x1, double x2) { return x1 + x2 > 3; }, 10000, 1, 8);
  const auto p = single_decision(s, pf);
  const ConditionalFailureModel m(p, "X1");
  std::mt19937_64 g(9);
  std::normal_distribution<double> z;
  const std::size_t n = 100000;
  double sum = 0;
  for (std::size_t k = 0; k < n; ++k) sum += m(z(g));
  CHECK(std::abs(sum / n / pf - 1) < 0.05);
}

TEST_CASE("kernel density integrates to one") {
  const auto s = oracle::rejection_samples([](double x1, double x2) { return x1 + x2 > 3; }, 10000, 1, 10);
  const auto col = s.column("X1");
  const GaussianKde kde({col.begin(), col.end()});
  const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
  const double mass = oracle::simpson([&](double x) { return kde.pdf(x); }, *lo - 10 * kde.bandwidth(),
                                      *hi + 10 * kde.bandwidth(), 20000);
  CHECK(std::abs(mass - 1) < 1e-3);
  CHECK(GaussianKde({1.0, 2.0, 3.0}, 0.5).bandwidth() == 0.5);
  CHECK_THROWS_AS(GaussianKde({}), DomainError);
  CHECK_THROWS_AS(GaussianKde({1.0}, 0.0), DomainError);
}

TEST_CASE("few failure samples raise an accuracy warning") {
  const auto s = oracle::rejection_samples([](double x1, double x2) { return x1 + x2 > 3; }, 150, 1, 11);
  const ConditionalFailureModel m(single_decision(s, 0.017), "X1");
  REQUIRE(m.warning().has_value());
  CHECK(m.warning()->find("150") != std::string::npos);
}

TEST_CASE("rare-event value matches the quadrature oracle") {
  const auto p = quadrature_toy();
  // Pr(F | x, a1) = Phi(x - 2), Pr(F | x, a2) = 0.05; a1 is optimal a priori.
  const double eu2 = -8 * 0.05 - 1 * 0.95;
  const double exact = oracle::simpson(
      [&](double x) { return oracle::phi(x) * std::max(0.0, eu2 + 10 * oracle::Phi(x - 2)); }, -10, 10, 1000000);
  const auto v = evppi_rare(p, "X1", 100000, RandomSource(12));
  INFO("exact " << exact << " estimate " << v.raw << " se " << v.se);
  CHECK(std::abs(v.raw - exact) < 3 * v.se);
  CHECK(v.value > 0);
}

TEST_CASE("rare-event value is zero when failure is uninformative") {
  auto p = quadrature_toy();
  SUBCASE("constant conditional failure probabilities") {
    const auto f1 = oracle::rejection_samples([](double, double) { return true; }, 5000, 1, 40);
    const auto f2 = oracle::rejection_samples([](double, double) { return true; }, 5000, 2, 41);
    p.failure_samples = oracle::stack_rows(f1, f2);
    p.p_failure = {0.05, 0.05};
    const auto v = evppi_rare(p, "X1", 20000, RandomSource(13));
    CHECK(v.raw == 0.0);
    CHECK(v.value == 0.0);
  }
  SUBCASE("utilities equal on failure and survival") {
    p.u_failure = p.u_survival;
    const auto v = evppi_rare(p, "X1", 20000, RandomSource(13));
    CHECK(v.raw == 0.0);
    CHECK(v.value == 0.0);
  }
}

TEST_CASE("rare-event errors") {
  auto p = quadrature_toy();
  CHECK_THROWS_AS(evppi_rare(p, "nope", 100, RandomSource(1)), ConfigError);
  CHECK_THROWS_AS(evppi_rare(p, "X1", 0, RandomSource(1)), DomainError);

  auto only_first = p;
  only_first.failure_samples = oracle::rejection_samples([](double, double) { return true; }, 300, 1, 2);
  CHECK_THROWS_AS(evppi_rare(only_first, "X1", 100, RandomSource(1)), SchemaError);

  auto bad_p = p;
  bad_p.p_failure[0] = 1.0;
  CHECK_THROWS_AS(bad_p.validate(), ConfigError);

  auto no_decision = p;
  SampleTable t;
  t.add_column("X1", {1.0});
  t.add_column("X2", {1.0});
  no_decision.failure_samples = t;
  CHECK_THROWS_AS(no_decision.validate(), SchemaError);

  RareEventProblem u = single_decision(oracle::rejection_samples([](double, double) { return true; }, 300, 1, 3), 0.1);
  u.factors[0].dist = DistributionSpec::uniform(-5, 5);
  CHECK_THROWS_AS(conditional_failure_probability(u, "X1", 7.0), DomainError);
}
