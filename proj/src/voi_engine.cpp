#include "voi/voi_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voi/decision_model.hpp"
#include "voi/errors.hpp"
#include "voi/parallel.hpp"

namespace voi {

IndexEstimate summarize_contributions(std::span<const double> c) {
  IndexEstimate e;
  const std::size_t n = c.size();
  if (n == 0) return e;
  double mean = 0;
  for (double v : c) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0;
  for (double v : c) ss += (v - mean) * (v - mean);
  e.raw = mean;
  e.se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  e.value = (mean <= 0 || std::abs(mean) < 2 * e.se) ? 0.0 : mean;
  return e;
}

std::string_view to_string(EvppiEstimator e) { return e == EvppiEstimator::plugin ? "plugin" : "reoptimize"; }

EvppiEstimator parse_evppi_estimator(std::string_view name) {
  if (name == "plugin") return EvppiEstimator::plugin;
  if (name == "reoptimize") return EvppiEstimator::reoptimize;
  throw ConfigError("unknown estimator '" + std::string(name) + "' (expected plugin or reoptimize)");
}

std::string_view to_string(Normalizer n) { return n == Normalizer::evpi ? "evpi" : "evpm"; }

Normalizer parse_normalizer(std::string_view name) {
  if (name == "evpi") return Normalizer::evpi;
  if (name == "evpm") return Normalizer::evpm;
  throw ConfigError("unknown normalizer '" + std::string(name) + "' (expected evpi or evpm)");
}

namespace {

std::size_t require_decisions(const SampleTable& table) {
  const std::size_t na = table.decision_count();
  if (na == 0) throw SchemaError("table has no utility columns (u_a1, u_a2, ...)");
  if (table.rows() == 0) throw DomainError("table has no rows");
  return na;
}

std::vector<std::span<const double>> conditioning_columns(const SampleTable& table,
                                                          const std::vector<std::string>& factors) {
  if (factors.empty()) throw ConfigError("empty factor group");
  if (factors.size() > 2) throw DomainError("factor groups are limited to two factors");
  std::vector<std::span<const double>> cols;
  for (const auto& f : factors) {
    if (!table.has(f)) throw ConfigError("unknown factor '" + f + "'");
    cols.push_back(table.column(f));
  }
  return cols;
}

// argmax preferring `preferred` on ties, then the lowest index.
std::size_t argmax_prefer(std::span<const double> v, std::size_t preferred) {
  std::size_t best = preferred;
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (v[a] > v[best]) best = a;
  }
  return best;
}

}  // namespace

std::vector<Smoother> fit_decision_smoothers(const SampleTable& table,
                                             const std::vector<std::span<const double>>& conditioning,
                                             const SmootherConfig& cfg) {
  const std::size_t na = require_decisions(table);
  std::vector<Smoother> out;
  out.reserve(na);
  for (std::size_t a = 0; a < na; ++a) out.push_back(Smoother::fit(conditioning, table.utility(a), cfg));
  return out;
}

CvppiProfile::CvppiProfile(std::vector<Smoother> smoothers, std::optional<std::size_t> a_opt)
    : smoothers_(std::move(smoothers)), a_opt_(0) {
  if (!a_opt) throw StateError("CVPPI requires the prior optimum to be computed first");
  if (*a_opt >= smoothers_.size()) throw DomainError("prior optimum index out of range");
  a_opt_ = *a_opt;
}

std::size_t CvppiProfile::best_decision(double x) const {
  std::vector<double> s(smoothers_.size());
  for (std::size_t a = 0; a < s.size(); ++a) s[a] = smoothers_[a].predict(x);
  return argmax_prefer(s, a_opt_);
}

double CvppiProfile::operator()(double x) const {
  double best = -INFINITY;
  double at_opt = 0;
  for (std::size_t a = 0; a < smoothers_.size(); ++a) {
    const double s = smoothers_[a].predict(x);
    best = std::max(best, s);
    if (a == a_opt_) at_opt = s;
  }
  return best - at_opt;
}

CvppiProfile cvppi_profile(const SampleTable& table, const std::string& factor, const SmootherConfig& cfg,
                           std::optional<std::size_t> a_opt) {
  if (!a_opt) throw StateError("CVPPI requires the prior optimum to be computed first");
  const auto cols = conditioning_columns(table, {factor});
  return CvppiProfile(fit_decision_smoothers(table, cols, cfg), a_opt);
}

ConditionalAnalysis analyze_conditioning(const SampleTable& table,
                                         const std::vector<std::span<const double>>& conditioning,
                                         const EvppiOptions& options, std::size_t a_opt) {
  const std::size_t na = require_decisions(table);
  if (conditioning.empty() || conditioning.size() > 2) {
    throw DomainError("conditioning is limited to one or two variables");
  }
  if (a_opt >= na) throw DomainError("prior optimum index out of range");
  const std::size_t n = table.rows();
  const auto smoothers = fit_decision_smoothers(table, conditioning, options.smoother);
  std::vector<std::vector<double>> s(na);
  for (std::size_t a = 0; a < na; ++a) {
    s[a] = conditioning.size() == 1 ? smoothers[a].predict_batch(conditioning[0])
                                    : smoothers[a].predict_batch(conditioning[0], conditioning[1]);
  }
  ConditionalAnalysis r;
  r.conditional_decision.resize(n);
  std::vector<double> plugin(n), reopt(n);
  std::vector<double> row(na);
  std::size_t changes = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < na; ++a) row[a] = s[a][k];
    const std::size_t best = argmax_prefer(row, a_opt);
    r.conditional_decision[k] = best;
    plugin[k] = row[best] - row[a_opt];
    reopt[k] = table.utility(best)[k] - table.utility(a_opt)[k];
    if (best != a_opt) ++changes;
  }
  const IndexEstimate p = summarize_contributions(plugin);
  const IndexEstimate q = summarize_contributions(reopt);
  r.v = options.estimator == EvppiEstimator::plugin ? p : q;
  r.v_other = options.estimator == EvppiEstimator::plugin ? q : p;
  const double dc = static_cast<double>(changes) / static_cast<double>(n);
  r.dc = {dc, dc, std::sqrt(dc * (1 - dc) / static_cast<double>(n)), true};
  return r;
}

IndexEstimate evppi(const SampleTable& table, const std::vector<std::string>& factors, const EvppiOptions& options) {
  const auto cols = conditioning_columns(table, factors);
  return analyze_conditioning(table, cols, options, prior_optimum(table)).v;
}

double decision_change_probability(const SampleTable& table, const std::vector<std::string>& factors,
                                   const SmootherConfig& cfg) {
  const auto cols = conditioning_columns(table, factors);
  EvppiOptions o;
  o.smoother = cfg;
  return analyze_conditioning(table, cols, o, prior_optimum(table)).dc.value;
}

IndexEstimate evpi(const SampleTable& table) {
  const std::size_t na = require_decisions(table);
  const std::size_t a_opt = prior_optimum(table);
  const std::size_t n = table.rows();
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    double best = -INFINITY;
    for (std::size_t a = 0; a < na; ++a) best = std::max(best, table.utility(a)[k]);
    c[k] = best - table.utility(a_opt)[k];
  }
  return summarize_contributions(c);
}

IndexEstimate evpm(const SampleTable& table) {
  if (!table.aleatory_reduced()) {
    throw StateError("EVPM needs utilities conditional on the epistemic factors; this table has the aleatory "
                     "factors realized (its EVPI is the full-information value)");
  }
  return evpi(table);
}

std::optional<double> relative_iv(double v, const IndexEstimate& normalizer) {
  if (!normalizer.defined || !(normalizer.value > 0)) return std::nullopt;
  return v / normalizer.value;
}

StatisticSampler gumbel_location_statistic(double scale) {
  if (!(scale > 0)) throw DomainError("gumbel scale must be positive");
  return [scale](double location, std::size_t n_s, const RandomSource& row) {
    // exp(-s_i / scale) = exp(-location / scale) * E_i with E_i ~ Exp(1).
    double sum = 0;
    for (std::size_t j = 0; j < n_s; ++j) sum += -std::log(row.uniform_at(j));
    return -location / scale + std::log(sum);
  };
}

IndexEstimate sample_information_value(const SampleTable& table, const std::string& factor, std::size_t n_s,
                                       const StatisticSampler& statistic, const RandomSource& src,
                                       const EvppiOptions& options) {
  if (!table.has(factor)) throw ConfigError("unknown factor '" + factor + "'");
  if (n_s == 0) return {};
  const auto x = table.column(factor);
  std::vector<double> z(table.rows());
  parallel_for(z.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) z[k] = statistic(x[k], n_s, src.split(k));
  });
  return analyze_conditioning(table, {std::span<const double>(z)}, options, prior_optimum(table)).v;
}

IndexEstimate sobol_first_order(const SampleTable& table, const std::string& factor, std::span<const double> y,
                                const SmootherConfig& cfg) {
  if (!table.has(factor)) throw ConfigError("unknown factor '" + factor + "'");
  if (y.size() != table.rows()) throw DomainError("output length differs from the table");
  const std::size_t n = y.size();
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double vy = 0;
  for (double v : y) vy += (v - ybar) * (v - ybar);
  vy /= static_cast<double>(n);
  IndexEstimate e;
  if (!(vy > 0) || !(vy > 1e-24 * ybar * ybar)) {
    e.defined = false;
    return e;
  }
  const auto x = table.column(factor);
  const auto s = Smoother::fit(x, y, cfg).predict_batch(x);
  const double sbar = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  double vs = 0;
  for (double v : s) vs += (v - sbar) * (v - sbar);
  vs /= static_cast<double>(n);
  const double ratio = vs / vy;
  // Delta method for a ratio of two means of per-sample terms.
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = ((s[k] - sbar) * (s[k] - sbar) - ratio * (y[k] - ybar) * (y[k] - ybar)) / vy;
  }
  const IndexEstimate gs = summarize_contributions(g);
  e.raw = ratio;
  e.se = gs.se;
  e.value = ratio < 2 * e.se ? 0.0 : std::min(ratio, 1.0);
  return e;
}

IndexEstimate sobol_first_order(const SampleTable& table, const std::string& factor, const std::string& output,
                                const SmootherConfig& cfg) {
  return sobol_first_order(table, factor, table.column(output), cfg);
}

VoiReport analyze_discrete(const SampleTable& table, const DiscreteAnalysisOptions& options) {
  const std::size_t na = require_decisions(table);
  VoiReport r;
  r.discrete = true;
  r.n = table.rows();
  r.estimator = options.evppi.estimator;
  r.smoother = options.evppi.smoother;
  r.normalizer = options.normalizer;
  for (std::size_t a = 0; a < na; ++a) r.decision_labels.push_back("a" + std::to_string(a + 1));
  r.expected_utilities = prior_expected_utilities(table);
  r.a_opt_index = prior_optimum(r.expected_utilities);
  r.a_opt = static_cast<double>(r.a_opt_index + 1);
  r.prior_expected_utility = r.expected_utilities[r.a_opt_index];
  r.evpi = evpi(table);
  if (table.aleatory_reduced()) {
    r.evpm = evpm(table);
  } else {
    r.evpi_full_model = r.evpi;
  }
  IndexEstimate norm = r.evpi;
  if (options.normalizer == Normalizer::evpm) {
    if (r.evpm) {
      norm = *r.evpm;
    } else {
      r.warnings.push_back("EVPM is not available for a table with realized aleatory factors; relative values use EVPI");
    }
  }

  const auto y = table.utility(r.a_opt_index);
  for (const auto& group : options.groups) {
    const auto cols = conditioning_columns(table, group);
    FactorResult f;
    f.factors = group;
    f.name = group[0];
    for (std::size_t i = 1; i < group.size(); ++i) f.name += "+" + group[i];
    const ConditionalAnalysis ca = analyze_conditioning(table, cols, options.evppi, r.a_opt_index);
    f.v = ca.v;
    f.v_other = ca.v_other;
    f.dc = ca.dc;
    f.relative_v = relative_iv(f.v.value, norm);
    if (group.size() == 1) {
      f.sobol = sobol_first_order(table, group[0], y, options.evppi.smoother);
    } else {
      f.sobol.defined = false;
    }
    if (f.v.value > r.evpi.raw + 3 * std::hypot(f.v.se, r.evpi.se)) {
      r.warnings.push_back("information value of " + f.name + " exceeds EVPI beyond 3 standard errors");
    }
    r.factors.push_back(std::move(f));
  }
  return r;
}

}  // namespace voi
