#include "voi/decision_model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "voi/errors.hpp"
#include "voi/parallel.hpp"
#include "voi/quadrature.hpp"

namespace voi {

DecisionSpace DecisionSpace::discrete(std::vector<std::string> labels) {
  if (labels.size() < 2) throw ConfigError("a discrete decision space needs at least two alternatives");
  DecisionSpace d;
  d.discrete_ = true;
  d.labels_ = std::move(labels);
  return d;
}

DecisionSpace DecisionSpace::continuous(double lower, double upper) {
  if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper)) {
    throw ConfigError("a continuous decision space needs finite bounds with lower < upper");
  }
  DecisionSpace d;
  d.discrete_ = false;
  d.lower_ = lower;
  d.upper_ = upper;
  return d;
}

namespace {

constexpr double kExceedanceTol = 1e-10;

// int_0^{exp(z)} (1 - e^-u) / u du, split at u = 1. Above 1 the integral is
// taken in t = ln u, where the integrand 1 - exp(-e^t) is smooth and bounded.
double exceedance_integral(double z) {
  const double head_end = z < 0 ? std::exp(z) : 1.0;
  double total = 0.0;
  if (head_end > 0) {
    total += integrate(
        [](double u) { return u < 1e-8 ? 1.0 - 0.5 * u : -std::expm1(-u) / u; }, 0.0, head_end,
        kExceedanceTol);
  }
  if (z > 0) {
    total += integrate([](double t) { return -std::expm1(-std::exp(t)); }, 0.0, z, kExceedanceTol);
  }
  return total;
}

std::vector<double> copy_column(const SampleTable& t, const std::string& name) {
  const auto c = t.column(name);
  return {c.begin(), c.end()};
}

}  // namespace

double exceedance_expected_loss(double location, double resistance, double cost_factor, double scale) {
  if (cost_factor < 0) throw DomainError("cost factor must be nonnegative");
  if (!(scale > 0)) throw DomainError("gumbel scale must be positive");
  if (cost_factor == 0) return 0.0;
  const double z = (location - resistance) / scale;
  return cost_factor * scale * exceedance_integral(z);
}

double ClosedFormUtility::operator()(double y, double a) const {
  const double d = y - a;
  if (kind == ClosedFormKind::quadratic) return -c * d * d;
  const double g = gamma * d;
  return -c * (std::expm1(g) - g);
}

const FactorSpec& Problem::factor(const std::string& name) const {
  for (const auto& f : factors) {
    if (f.name == name) return f;
  }
  throw ConfigError("unknown factor '" + name + "'");
}

std::vector<std::string> Problem::epistemic_names() const {
  std::vector<std::string> out;
  for (const auto& f : factors) {
    if (f.cls == FactorClass::epistemic) out.push_back(f.name);
  }
  return out;
}

std::vector<std::string> Problem::aleatory_names() const {
  std::vector<std::string> out;
  for (const auto& f : factors) {
    if (f.cls == FactorClass::aleatory) out.push_back(f.name);
  }
  return out;
}

Problem working_example_discrete(const DiscreteWorkingExample& p) {
  if (p.resistance_means.size() != p.costs.size() || p.costs.size() < 2) {
    throw ConfigError("working example needs one resistance and one cost per alternative (at least two)");
  }
  Problem prob;
  prob.factors.push_back({"M", DistributionSpec::normal(p.load_location_mean, p.load_location_std),
                          FactorClass::epistemic});
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < p.resistance_means.size(); ++k) {
    prob.factors.push_back({"R" + std::to_string(k + 1),
                            DistributionSpec::lognormal(p.resistance_means[k], p.resistance_std),
                            FactorClass::epistemic});
    labels.push_back("a" + std::to_string(k + 1));
  }
  prob.factors.push_back(
      {"CF", DistributionSpec::lognormal(p.cost_factor_mean, p.cost_factor_std), FactorClass::epistemic});
  prob.factors.push_back({"S", DistributionSpec::gumbel(p.load_location_mean, 1.0), FactorClass::aleatory});
  prob.decisions = DecisionSpace::discrete(std::move(labels));
  prob.utility = p;
  return prob;
}

Problem working_example_continuous(const ContinuousWorkingExample& p) {
  Problem prob;
  prob.factors.push_back({"M", DistributionSpec::normal(p.load_location_mean, p.load_location_std),
                          FactorClass::epistemic});
  prob.factors.push_back({"XR", DistributionSpec::lognormal(p.model_uncertainty_mean, p.model_uncertainty_std),
                          FactorClass::epistemic});
  prob.factors.push_back(
      {"CF", DistributionSpec::lognormal(p.cost_factor_mean, p.cost_factor_std), FactorClass::epistemic});
  prob.factors.push_back({"S", DistributionSpec::gumbel(p.load_location_mean, 1.0), FactorClass::aleatory});
  prob.decisions = DecisionSpace::continuous(p.a_min, p.a_max);
  prob.utility = p;
  return prob;
}

void validate(const Problem& problem) {
  std::set<std::string> seen;
  for (const auto& f : problem.factors) {
    if (f.name.empty()) throw ConfigError("factor with empty name");
    if (!seen.insert(f.name).second) throw ConfigError("duplicate factor name '" + f.name + "'");
  }
  std::visit(
      [&](const auto& u) {
        using T = std::decay_t<decltype(u)>;
        if constexpr (std::is_same_v<T, DiscreteWorkingExample>) {
          if (!problem.decisions.is_discrete() || problem.decisions.size() != u.costs.size()) {
            throw ConfigError("discrete working example needs one decision per cost entry");
          }
        } else if constexpr (std::is_same_v<T, ContinuousWorkingExample>) {
          if (problem.decisions.is_discrete()) throw ConfigError("continuous working example needs a continuous decision");
        } else if constexpr (std::is_same_v<T, ClosedFormUtility>) {
          if (problem.decisions.is_discrete()) throw ConfigError("quadratic/LINEX utilities need a continuous decision");
          if (!(u.c > 0)) throw ConfigError("utility constant c must be positive");
          if (u.kind == ClosedFormKind::linex && !(u.gamma > 0)) throw ConfigError("LINEX gamma must be positive");
        } else {
          if (!problem.decisions.is_discrete()) throw ConfigError("tabulated utilities need a discrete decision space");
        }
      },
      problem.utility);
}

SampleTable sample_epistemic(const Problem& problem, std::size_t n, const RandomSource& src) {
  if (n == 0) throw DomainError("sample count must be positive");
  SampleTable t;
  for (std::size_t j = 0; j < problem.factors.size(); ++j) {
    const auto& f = problem.factors[j];
    if (f.cls != FactorClass::epistemic) continue;
    RandomSource sub = src.split(j);
    t.add_column(f.name, sample(f.dist, n, sub));
  }
  return t;
}

namespace {

// Stream id reserved for the aleatory load draws.
constexpr std::uint64_t kLoadStream = 0x10ad;

std::vector<double> sample_load(std::span<const double> location, const RandomSource& src) {
  const RandomSource sub = src.split(kLoadStream);
  std::vector<double> s(location.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = location[i] - std::log(-std::log(sub.uniform_at(i)));
  return s;
}

}  // namespace

SampleTable evaluate_utilities(const Problem& problem, const SampleTable& samples, const RandomSource& src,
                               bool full_model) {
  if (const auto* tab = std::get_if<TabulatedUtility>(&problem.utility)) {
    (void)tab;
    for (std::size_t k = 0; k < problem.decisions.size(); ++k) {
      if (!samples.has(utility_column(k))) {
        throw SchemaError("tabulated utilities: missing decision column '" + utility_column(k) + "'");
      }
    }
    return samples;
  }
  const auto* we = std::get_if<DiscreteWorkingExample>(&problem.utility);
  if (!we) throw ConfigError("evaluate_utilities: utility model needs a discrete decision space");

  const std::size_t n = samples.rows();
  const std::size_t na = we->costs.size();
  const auto m = samples.column("M");
  const auto cf = samples.column("CF");
  SampleTable out = samples;
  std::vector<double> load;
  if (full_model) {
    load = sample_load(m, src);
    out.set_column("S", load);
  }
  std::vector<std::vector<double>> losses(na, std::vector<double>(n));
  for (std::size_t k = 0; k < na; ++k) {
    const auto r = samples.column("R" + std::to_string(k + 1));
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        losses[k][i] = full_model ? cf[i] * std::max(load[i] - r[i], 0.0)
                                  : exceedance_expected_loss(m[i], r[i], cf[i]);
      }
    });
  }
  for (std::size_t k = 0; k < na; ++k) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = -losses[k][i] - we->costs[k];
    out.set_column("y_a" + std::to_string(k + 1), std::move(losses[k]));
    out.set_column(utility_column(k), std::move(u));
  }
  out.set_aleatory_reduced(!full_model);
  return out;
}

ContinuousSamples evaluate_continuous_utilities(const Problem& problem, const SampleTable& samples,
                                                const RandomSource& src, bool full_model) {
  ContinuousSamples cs;
  cs.a_min = problem.decisions.lower();
  cs.a_max = problem.decisions.upper();
  if (const auto* cf = std::get_if<ClosedFormUtility>(&problem.utility)) {
    cs.table = samples;
    auto y = std::make_shared<const std::vector<double>>(copy_column(samples, cf->outcome));
    const ClosedFormUtility u = *cf;
    cs.utility = [y, u](std::size_t row, double a) { return u((*y)[row], a); };
    cs.deterministic_optimum = [y](std::size_t row) -> std::optional<double> { return (*y)[row]; };
    cs.closed_form = u;
    return cs;
  }
  const auto* we = std::get_if<ContinuousWorkingExample>(&problem.utility);
  if (!we) throw ConfigError("evaluate_continuous_utilities: utility model needs a continuous decision space");

  cs.table = samples;
  auto m = std::make_shared<const std::vector<double>>(copy_column(samples, "M"));
  auto xr = std::make_shared<const std::vector<double>>(copy_column(samples, "XR"));
  auto cfac = std::make_shared<const std::vector<double>>(copy_column(samples, "CF"));
  const double slope = we->cost_slope;
  const double fixed = we->cost_fixed;
  if (full_model) {
    auto s = std::make_shared<const std::vector<double>>(sample_load(*m, src));
    cs.table.set_column("S", *s);
    cs.table.set_aleatory_reduced(false);
    cs.utility = [s, xr, cfac, slope, fixed](std::size_t i, double a) {
      return -(*cfac)[i] * std::max((*s)[i] - a * (*xr)[i], 0.0) - (a * slope + fixed);
    };
    // Loss is avoided exactly at a = s / x_R; beyond it only cost grows.
    cs.deterministic_optimum = [s, xr, cfac, slope](std::size_t i) -> std::optional<double> {
      if ((*cfac)[i] * (*xr)[i] <= slope) return std::nullopt;
      return (*s)[i] / (*xr)[i];
    };
  } else {
    cs.table.set_aleatory_reduced(true);
    cs.utility = [m, xr, cfac, slope, fixed](std::size_t i, double a) {
      return -exceedance_expected_loss((*m)[i], a * (*xr)[i], (*cfac)[i]) - (a * slope + fixed);
    };
    // Stationary point of the expected utility: marginal cost equals marginal
    // risk reduction, c_F x_R (1 - F_S(a x_R)) = slope.
    cs.deterministic_optimum = [m, xr, cfac, slope](std::size_t i) -> std::optional<double> {
      const double q = slope / ((*cfac)[i] * (*xr)[i]);
      if (!(q > 0 && q < 1)) return std::nullopt;
      return (-std::log(-std::log1p(-q)) + (*m)[i]) / (*xr)[i];
    };
  }
  return cs;
}

std::vector<double> prior_expected_utilities(const SampleTable& table) {
  if (table.rows() == 0) throw DomainError("cannot take expectations over an empty table");
  const std::size_t na = table.decision_count();
  if (na == 0) throw SchemaError("table has no utility columns");
  std::vector<double> eu(na);
  for (std::size_t k = 0; k < na; ++k) {
    const auto u = table.utility(k);
    double s = 0.0;
    for (double v : u) s += v;
    eu[k] = s / static_cast<double>(u.size());
  }
  return eu;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw DomainError("argmax of an empty set");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

std::size_t prior_optimum(std::span<const double> expected_utilities) { return argmax(expected_utilities); }

std::size_t prior_optimum(const SampleTable& table) { return argmax(prior_expected_utilities(table)); }

}  // namespace voi
