#include "voi/rare_event.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "voi/errors.hpp"
#include "voi/parallel.hpp"

namespace voi {

namespace {

constexpr std::size_t kMinFailureSamples = 200;

std::vector<double> failure_column(const RareEventProblem& p, const std::string& factor, std::size_t decision) {
  const auto x = p.failure_samples.column(factor);
  const auto d = p.failure_samples.column("decision");
  std::vector<double> out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::lround(d[k]) == static_cast<long>(decision + 1)) out.push_back(x[k]);
  }
  return out;
}

}  // namespace

void RareEventProblem::validate() const {
  const std::size_t na = p_failure.size();
  if (na < 1) throw ConfigError("rare-event problem needs at least one decision");
  if (u_failure.size() != na || u_survival.size() != na) {
    throw ConfigError("rare-event utilities must be given for every decision");
  }
  for (double p : p_failure) {
    if (!(p > 0 && p < 1)) throw ConfigError("prior failure probability must lie in (0, 1)");
  }
  if (!failure_samples.has("decision")) throw SchemaError("failure samples need a 'decision' column");
  for (const auto& f : factors) {
    if (!failure_samples.has(f.name)) throw SchemaError("failure samples lack factor column '" + f.name + "'");
  }
  std::vector<std::size_t> count(na, 0);
  for (double d : failure_samples.column("decision")) {
    const long k = std::lround(d);
    if (k < 1 || static_cast<std::size_t>(k) > na || static_cast<double>(k) != d) {
      throw SchemaError("failure-sample decision " + std::to_string(d) + " is not in 1.." + std::to_string(na));
    }
    ++count[static_cast<std::size_t>(k - 1)];
  }
  for (std::size_t a = 0; a < na; ++a) {
    if (count[a] == 0) throw SchemaError("no failure samples for decision " + std::to_string(a + 1));
  }
}

double expected_utility_rare(double p, double u_failure, double u_survival) {
  if (!(p >= 0 && p <= 1)) throw DomainError("conditional failure probability must lie in [0, 1]");
  return u_failure * p + u_survival * (1 - p);
}

GaussianKde::GaussianKde(std::vector<double> data, std::optional<double> bandwidth) : data_(std::move(data)) {
  if (data_.empty()) throw DomainError("density estimate needs data");
  std::sort(data_.begin(), data_.end());
  if (bandwidth) {
    if (!(*bandwidth > 0)) throw DomainError("bandwidth must be positive");
    h_ = *bandwidth;
    return;
  }
  const double n = static_cast<double>(data_.size());
  double m = 0;
  for (double v : data_) m += v;
  m /= n;
  double ss = 0;
  for (double v : data_) ss += (v - m) * (v - m);
  const double sd = data_.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  auto q = [&](double p) {
    const double pos = p * (n - 1);
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= data_.size()) return data_.back();
    return data_[i] + (pos - static_cast<double>(i)) * (data_[i + 1] - data_[i]);
  };
  const double iqr = (q(0.75) - q(0.25)) / 1.34;
  double spread = iqr > 0 ? std::min(sd, iqr) : sd;
  if (!(spread > 0)) spread = std::max(std::abs(m), 1.0) * 1e-3;
  h_ = 0.9 * spread * std::pow(n, -0.2);
}

double GaussianKde::pdf(double x) const {
  const double reach = 8.0 * h_;
  const auto b = std::lower_bound(data_.begin(), data_.end(), x - reach);
  const auto e = std::upper_bound(b, data_.end(), x + reach);
  double s = 0;
  for (auto it = b; it != e; ++it) {
    const double z = (x - *it) / h_;
    s += std::exp(-0.5 * z * z);
  }
  return s / (static_cast<double>(data_.size()) * h_ * std::sqrt(2 * std::numbers::pi));
}

ConditionalFailureModel::ConditionalFailureModel(const RareEventProblem& problem, const std::string& factor,
                                                 std::size_t decision)
    : prior_([&] {
        for (const auto& f : problem.factors) {
          if (f.name == factor) return f.dist;
        }
        throw ConfigError("unknown factor '" + factor + "'");
      }()),
      p_failure_([&] {
        if (decision >= problem.decision_count()) throw DomainError("decision index out of range");
        return problem.p_failure[decision];
      }()),
      kde_(failure_column(problem, factor, decision)) {
  if (kde_.size() < kMinFailureSamples) {
    warning_ = "only " + std::to_string(kde_.size()) + " failure samples for decision " +
               std::to_string(decision + 1) + "; conditional failure probabilities are unreliable below " +
               std::to_string(kMinFailureSamples);
  }
}

double ConditionalFailureModel::operator()(double x) const {
  const double f = pdf(prior_, x);
  if (!(f >= 1e-300)) {
    throw DomainError("prior density is numerically zero at x = " + std::to_string(x));
  }
  return std::clamp(p_failure_ * kde_.pdf(x) / f, 0.0, 1.0);
}

double conditional_failure_probability(const RareEventProblem& problem, const std::string& factor, double x,
                                       std::size_t decision) {
  return ConditionalFailureModel(problem, factor, decision)(x);
}

IndexEstimate evppi_rare(const RareEventProblem& problem, const std::string& factor, std::size_t n_prior,
                         const RandomSource& src) {
  problem.validate();
  if (n_prior == 0) throw DomainError("need at least one prior draw");
  const std::size_t na = problem.decision_count();
  std::vector<ConditionalFailureModel> models;
  for (std::size_t a = 0; a < na; ++a) models.emplace_back(problem, factor, a);

  std::vector<double> prior_eu(na);
  for (std::size_t a = 0; a < na; ++a) {
    prior_eu[a] = expected_utility_rare(problem.p_failure[a], problem.u_failure[a], problem.u_survival[a]);
  }
  const std::size_t a_opt = argmax(prior_eu);

  RandomSource stream = src;
  const auto x = sample(problem.factors.at([&] {
    for (std::size_t j = 0; j < problem.factors.size(); ++j) {
      if (problem.factors[j].name == factor) return j;
    }
    throw ConfigError("unknown factor '" + factor + "'");
  }()).dist, n_prior, stream);

  std::vector<double> c(n_prior);
  parallel_for(n_prior, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      double best = -INFINITY;
      double at_opt = 0;
      for (std::size_t a = 0; a < na; ++a) {
        const double eu = expected_utility_rare(models[a](x[k]), problem.u_failure[a], problem.u_survival[a]);
        best = std::max(best, eu);
        if (a == a_opt) at_opt = eu;
      }
      c[k] = best - at_opt;
    }
  });
  return summarize_contributions(c);
}

SampleTable read_failure_samples(const std::string& path) {
  SampleTable t = SampleTable::read_csv_file(path);
  if (!t.has("decision")) throw SchemaError(path + ": failure samples need a 'decision' column");
  return t;
}

}  // namespace voi
