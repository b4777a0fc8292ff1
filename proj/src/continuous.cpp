#include "voi/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "voi/errors.hpp"
#include "voi/parallel.hpp"

namespace voi {

namespace {

constexpr std::size_t kBaselinePoints = 129;
constexpr std::size_t kBaselineRows = 20000;

}  // namespace

AugmentedTable augment(const ContinuousSamples& samples, const RandomSource& src) {
  return augment(samples, samples.a_min, samples.a_max, src);
}

AugmentedTable augment(const ContinuousSamples& samples, double lower, double upper, const RandomSource& src) {
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw DomainError("decision bounds must satisfy lower < upper");
  }
  if (!samples.utility) throw StateError("samples carry no utility function");
  const std::size_t n = samples.table.rows();
  AugmentedTable out;
  out.table = samples.table;
  out.a_min = lower;
  out.a_max = upper;
  std::vector<double> a(n), u(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      a[k] = lower + (upper - lower) * src.uniform_at(k);
      u[k] = samples.utility(k, a[k]);
    }
  });
  out.table.set_column("a", std::move(a));
  out.table.set_column("u", std::move(u));

  const std::size_t rows = std::min<std::size_t>(n, kBaselineRows);
  if (rows == 0) return out;
  std::vector<double> grid(kBaselinePoints), mean(kBaselinePoints);
  for (std::size_t g = 0; g < kBaselinePoints; ++g) {
    grid[g] = lower + (upper - lower) * static_cast<double>(g) / static_cast<double>(kBaselinePoints - 1);
  }
  parallel_for(kBaselinePoints, [&](std::size_t b, std::size_t e) {
    for (std::size_t g = b; g < e; ++g) {
      double s = 0;
      for (std::size_t k = 0; k < rows; ++k) s += samples.utility(k, grid[g]);
      mean[g] = s / static_cast<double>(rows);
    }
  });
  out.baseline = MonotoneCubic(std::move(grid), std::move(mean));
  return out;
}

OptimalDecisionMap::OptimalDecisionMap(std::string factor, std::vector<double> knots, std::vector<double> optima,
                                       double a_min, double a_max, std::size_t bound_hits, Smoother profile,
                                       MonotoneCubic baseline)
    : factor_(std::move(factor)),
      interp_(std::move(knots), std::move(optima)),
      a_min_(a_min),
      a_max_(a_max),
      bound_hits_(bound_hits),
      profile_(std::move(profile)),
      baseline_(std::move(baseline)) {
  const std::size_t k = interp_.knots().size();
  if (static_cast<double>(bound_hits_) > 0.05 * static_cast<double>(k)) {
    warning_ = "conditional optimum of " + factor_ + " hits a decision bound at " + std::to_string(bound_hits_) +
               " of " + std::to_string(k) + " knots; the bounds are likely too tight";
  }
}

double OptimalDecisionMap::operator()(double x) const { return std::clamp(interp_(x), a_min_, a_max_); }

OptimalDecisionMap conditional_optimum(const AugmentedTable& augmented, const std::string& factor,
                                       const ConditionalOptimumConfig& cfg) {
  const SampleTable& t = augmented.table;
  if (!t.has(factor)) throw ConfigError("unknown factor '" + factor + "'");
  if (!t.has("a") || !t.has("u")) throw SchemaError("augmented table needs columns 'a' and 'u'");
  if (cfg.knots < 2) throw ConfigError("at least two knots are required");
  SmootherConfig sc = cfg.smoother;
  sc.method = SmootherMethod::loess;
  sc.span = std::max(sc.span, 0.05);
  sc.degree = 2;
  const auto x = t.column(factor);
  const auto a = t.column("a");
  const auto u = t.column("u");
  const MonotoneCubic& base = augmented.baseline;
  std::vector<double> resid(u.begin(), u.end());
  if (!base.knots().empty()) {
    for (std::size_t k = 0; k < resid.size(); ++k) resid[k] -= base(a[k]);
  }
  Smoother profile = Smoother::fit(x, a, resid, sc);

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> knots;
  for (std::size_t j = 0; j < cfg.knots; ++j) {
    const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(cfg.knots);
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double v = i + 1 < sorted.size() ? sorted[i] + (pos - static_cast<double>(i)) * (sorted[i + 1] - sorted[i])
                                           : sorted.back();
    if (knots.empty() || v > knots.back()) knots.push_back(v);
  }
  std::vector<double> optima(knots.size());
  std::vector<char> hit(knots.size(), 0);
  parallel_for(knots.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      const double xj = knots[j];
      auto s = [&](double v) { return profile.predict(xj, v) + (base.knots().empty() ? 0.0 : base(v)); };
      const MaximizeResult r = maximize_on_interval(s,
                                                    augmented.a_min, augmented.a_max, cfg.grid_points, cfg.rel_tol);
      optima[j] = r.argmax;
      hit[j] = r.at_bound ? 1 : 0;
    }
  });
  const auto hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  return OptimalDecisionMap(factor, std::move(knots), std::move(optima), augmented.a_min, augmented.a_max, hits,
                            std::move(profile), base);
}

std::string_view to_string(ContinuousMode m) {
  switch (m) {
    case ContinuousMode::smoothed_profile: return "smoothed_profile";
    case ContinuousMode::closed_form_quadratic: return "closed_form_quadratic";
    case ContinuousMode::closed_form_linex: return "closed_form_linex";
  }
  return "unknown";
}

ContinuousMode parse_continuous_mode(std::string_view name) {
  if (name == "smoothed_profile") return ContinuousMode::smoothed_profile;
  if (name == "closed_form_quadratic") return ContinuousMode::closed_form_quadratic;
  if (name == "closed_form_linex") return ContinuousMode::closed_form_linex;
  throw ConfigError("unknown continuous mode '" + std::string(name) + "'");
}

std::vector<double> utility_at(const ContinuousSamples& samples, double a) {
  if (!samples.utility) throw StateError("samples carry no utility function");
  std::vector<double> u(samples.table.rows());
  parallel_for(u.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) u[k] = samples.utility(k, a);
  });
  return u;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// ln mean exp(gamma y) / gamma, shifted by the maximum.
double linex_certainty_equivalent(std::span<const double> y, double gamma) {
  const double ymax = *std::max_element(y.begin(), y.end());
  double s = 0;
  for (double v : y) s += std::exp(gamma * (v - ymax));
  return ymax + std::log(s / static_cast<double>(y.size())) / gamma;
}

std::span<const double> outcome_column(const ContinuousSamples& samples) {
  return samples.table.column(samples.closed_form->outcome);
}

}  // namespace

PriorOptimum prior_optimum_continuous(const ContinuousSamples& samples, int grid_points, double rel_tol) {
  if (samples.table.rows() == 0) throw DomainError("no samples");
  PriorOptimum p;
  if (samples.closed_form) {
    const auto y = outcome_column(samples);
    const ClosedFormUtility& cf = *samples.closed_form;
    if (cf.kind == ClosedFormKind::quadratic) {
      p.a_opt = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    } else {
      if (!(cf.gamma > 0)) throw DomainError("LINEX gamma must be positive");
      p.a_opt = linex_certainty_equivalent(y, cf.gamma);
    }
    p.expected_utility = mean_of(utility_at(samples, p.a_opt));
    return p;
  }
  const MaximizeResult r = maximize_on_interval([&](double a) { return mean_of(utility_at(samples, a)); },
                                                samples.a_min, samples.a_max, grid_points, rel_tol);
  p.a_opt = r.argmax;
  p.expected_utility = r.value;
  p.at_bound = r.at_bound;
  return p;
}

ContinuousEvppi evppi_continuous(const ContinuousSamples& samples, const AugmentedTable* augmented,
                                 const std::vector<std::string>& factors, double a_opt,
                                 const ContinuousVoiOptions& options) {
  if (factors.empty() || factors.size() > 2) throw DomainError("factor groups are limited to two factors");
  for (const auto& f : factors) {
    if (!samples.table.has(f)) throw ConfigError("unknown factor '" + f + "'");
  }
  const std::size_t n = samples.table.rows();
  ContinuousEvppi out;
  std::vector<double> contrib(n);

  if (options.mode == ContinuousMode::smoothed_profile) {
    if (!augmented) throw StateError("smoothed_profile mode needs an augmented table");
    if (factors.size() != 1) throw DomainError("smoothed_profile mode conditions on a single factor");
    OptimalDecisionMap map = conditional_optimum(*augmented, factors[0], options.optimum);
    const auto x = samples.table.column(factors[0]);
    const bool reopt = options.estimator == EvppiEstimator::reoptimize;
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        const double ak = map(x[k]);
        contrib[k] = reopt ? samples.utility(k, ak) - samples.utility(k, a_opt)
                           : map.profile(x[k], ak) - map.profile(x[k], a_opt);
      }
    });
    out.v = summarize_contributions(contrib);
    out.map = std::move(map);
    return out;
  }

  if (!samples.closed_form) throw ConfigError("closed-form modes need a quadratic or LINEX utility model");
  const ClosedFormUtility& cf = *samples.closed_form;
  const bool linex = options.mode == ContinuousMode::closed_form_linex;
  if (linex != (cf.kind == ClosedFormKind::linex)) {
    throw ConfigError(std::string("mode ") + std::string(to_string(options.mode)) + " does not match the utility model");
  }
  if (linex && !(cf.gamma > 0)) throw DomainError("LINEX gamma must be positive");
  const auto y = outcome_column(samples);
  std::vector<std::span<const double>> cond;
  for (const auto& f : factors) cond.push_back(samples.table.column(f));

  std::vector<double> a(n);
  if (!linex) {
    const Smoother s = Smoother::fit(cond, y, options.closed_form_smoother);
    a = cond.size() == 1 ? s.predict_batch(cond[0]) : s.predict_batch(cond[0], cond[1]);
  } else {
    const double ymax = *std::max_element(y.begin(), y.end());
    std::vector<double> w(n);
    double wmin = INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = std::exp(cf.gamma * (y[k] - ymax));
      if (w[k] > 0) wmin = std::min(wmin, w[k]);
    }
    if (!std::isfinite(wmin)) wmin = std::numeric_limits<double>::min();
    const Smoother s = Smoother::fit(cond, w, options.closed_form_smoother);
    const auto sl = cond.size() == 1 ? s.predict_batch(cond[0]) : s.predict_batch(cond[0], cond[1]);
    for (std::size_t k = 0; k < n; ++k) a[k] = ymax + std::log(std::max(sl[k], wmin)) / cf.gamma;
  }
  for (std::size_t k = 0; k < n; ++k) contrib[k] = cf(y[k], a[k]) - cf(y[k], a_opt);
  out.v = summarize_contributions(contrib);
  return out;
}

ContinuousPerfectInfo evpi_continuous(const ContinuousSamples& samples, double a_opt) {
  if (!samples.deterministic_optimum || !samples.utility) throw StateError("samples carry no utility function");
  const std::size_t n = samples.table.rows();
  std::vector<double> c(n);
  std::vector<char> ok(n, 0);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto ak = samples.deterministic_optimum(k);
      if (!ak) continue;
      ok[k] = 1;
      c[k] = samples.utility(k, *ak) - samples.utility(k, a_opt);
    }
  });
  std::vector<double> kept;
  kept.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (ok[k]) kept.push_back(c[k]);
  }
  ContinuousPerfectInfo r;
  r.excluded = n - kept.size();
  r.value = summarize_contributions(kept);
  return r;
}

ContinuousPerfectInfo evpm_continuous(const ContinuousSamples& samples, double a_opt) {
  if (!samples.table.aleatory_reduced()) {
    throw StateError("EVPM needs utilities conditional on the epistemic factors");
  }
  return evpi_continuous(samples, a_opt);
}

ContinuousAnalysis analyze_continuous(const ContinuousSamples& samples, const ContinuousAnalysisOptions& options,
                                      const RandomSource& src) {
  ContinuousAnalysis out;
  VoiReport& r = out.report;
  r.discrete = false;
  r.n = samples.table.rows();
  r.estimator = options.voi.estimator;
  r.smoother = options.voi.mode == ContinuousMode::smoothed_profile ? options.voi.optimum.smoother
                                                                     : options.voi.closed_form_smoother;
  r.normalizer = options.normalizer;

  const PriorOptimum prior = prior_optimum_continuous(samples, options.voi.optimum.grid_points,
                                                      options.voi.optimum.rel_tol);
  r.a_opt = prior.a_opt;
  r.prior_expected_utility = prior.expected_utility;
  if (prior.at_bound) r.warnings.push_back("prior optimum lies on a decision bound");

  const ContinuousPerfectInfo pi = evpi_continuous(samples, prior.a_opt);
  r.evpi = pi.value;
  if (pi.excluded > 0) {
    r.extra["excluded_samples"] = static_cast<double>(pi.excluded);
    r.warnings.push_back(std::to_string(pi.excluded) + " samples have no optimum under certainty and were excluded");
  }
  if (samples.table.aleatory_reduced()) {
    r.evpm = r.evpi;
  } else {
    r.evpi_full_model = r.evpi;
  }
  IndexEstimate norm = r.evpm ? *r.evpm : r.evpi;
  if (options.normalizer == Normalizer::evpi) norm = r.evpi;
  if (options.normalizer == Normalizer::evpm && !r.evpm) {
    r.warnings.push_back("EVPM is not available for samples with realized aleatory factors; relative values use EVPI");
  }

  std::optional<AugmentedTable> aug;
  if (options.voi.mode == ContinuousMode::smoothed_profile) aug = augment(samples, src);
  const std::vector<double> y = utility_at(samples, prior.a_opt);
  for (const auto& group : options.groups) {
    FactorResult f;
    f.factors = group;
    f.name = group[0];
    for (std::size_t i = 1; i < group.size(); ++i) f.name += "+" + group[i];
    ContinuousEvppi ce = evppi_continuous(samples, aug ? &*aug : nullptr, group, prior.a_opt, options.voi);
    f.v = ce.v;
    if (ce.map) {
      // The other estimator reuses the fitted map.
      const auto x = samples.table.column(group[0]);
      const bool reopt = options.voi.estimator == EvppiEstimator::reoptimize;
      std::vector<double> c(r.n);
      for (std::size_t k = 0; k < r.n; ++k) {
        const double ak = (*ce.map)(x[k]);
        c[k] = reopt ? ce.map->profile(x[k], ak) - ce.map->profile(x[k], prior.a_opt)
                     : samples.utility(k, ak) - samples.utility(k, prior.a_opt);
      }
      f.v_other = summarize_contributions(c);
      if (ce.map->warning()) r.warnings.push_back(*ce.map->warning());
      out.maps.push_back(std::move(*ce.map));
    } else {
      f.v_other.defined = false;
    }
    f.relative_v = relative_iv(f.v.value, norm);
    if (group.size() == 1) {
      f.sobol = sobol_first_order(samples.table, group[0], y, options.voi.closed_form_smoother);
    } else {
      f.sobol.defined = false;
    }
    r.factors.push_back(std::move(f));
  }
  return out;
}

}  // namespace voi
