#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "voi/decision_model.hpp"
#include "voi/interpolation.hpp"
#include "voi/smoothing.hpp"
#include "voi/voi_engine.hpp"

namespace voi {

/// Samples with an artificial decision column "a" drawn uniformly and
/// independently of the factors, and the realized utility in column "u".
struct AugmentedTable {
  SampleTable table;
  double a_min = 0.0;
  double a_max = 1.0;
  /// Sample-mean utility as a function of a. The smoother fits u minus this
  /// curve, which leaves a much flatter surface in a. Empty when unknown.
  MonotoneCubic baseline;
};

/// Uses the bounds stored in the samples.
AugmentedTable augment(const ContinuousSamples& samples, const RandomSource& src);
/// Explicit bounds, lower < upper.
AugmentedTable augment(const ContinuousSamples& samples, double lower, double upper, const RandomSource& src);

struct ConditionalOptimumConfig {
  /// Smoother of u over (factor, a). Span is raised to at least 0.05 and the
  /// degree fixed at 2 so the profile in a stays smooth.
  SmootherConfig smoother{SmootherMethod::loess, 0.1, std::nullopt, 2};
  std::size_t knots = 50;
  int grid_points = 64;
  double rel_tol = 1e-4;
};

/// x -> conditionally optimal decision, interpolated between knot optima.
class OptimalDecisionMap {
 public:
  OptimalDecisionMap(std::string factor, std::vector<double> knots, std::vector<double> optima, double a_min,
                     double a_max, std::size_t bound_hits, Smoother profile, MonotoneCubic baseline = {});

  double operator()(double x) const;
  /// Smoothed conditional expected utility S(x, a).
  double profile(double x, double a) const {
    return profile_.predict(x, a) + (baseline_.knots().empty() ? 0.0 : baseline_(a));
  }

  const std::string& factor() const noexcept { return factor_; }
  const std::vector<double>& knots() const noexcept { return interp_.knots(); }
  const std::vector<double>& optima() const noexcept { return interp_.values(); }
  double a_min() const noexcept { return a_min_; }
  double a_max() const noexcept { return a_max_; }
  std::size_t bound_hits() const noexcept { return bound_hits_; }
  /// Set when more than 5% of the knot optima sit on a bound.
  const std::optional<std::string>& warning() const noexcept { return warning_; }

 private:
  std::string factor_;
  MonotoneCubic interp_;
  double a_min_, a_max_;
  std::size_t bound_hits_;
  Smoother profile_;
  MonotoneCubic baseline_;
  std::optional<std::string> warning_;
};

OptimalDecisionMap conditional_optimum(const AugmentedTable& augmented, const std::string& factor,
                                       const ConditionalOptimumConfig& cfg = {});

enum class ContinuousMode { smoothed_profile, closed_form_quadratic, closed_form_linex };
std::string_view to_string(ContinuousMode m);
ContinuousMode parse_continuous_mode(std::string_view name);

struct ContinuousVoiOptions {
  ContinuousMode mode = ContinuousMode::smoothed_profile;
  /// Re-evaluate the utility at the conditional optimum (default) or use the
  /// smoothed profile for the value as well (plug-in).
  EvppiEstimator estimator = EvppiEstimator::reoptimize;
  ConditionalOptimumConfig optimum;
  /// Smoother of Y (quadratic) or exp(gamma Y) (LINEX) on the factors.
  SmootherConfig closed_form_smoother;
};

struct PriorOptimum {
  double a_opt = 0.0;
  double expected_utility = 0.0;
  bool at_bound = false;
};

/// Maximizes the sample-mean utility over [a_min, a_max]. Closed forms:
/// mean of Y (quadratic), (1/gamma) ln mean exp(gamma Y) (LINEX).
PriorOptimum prior_optimum_continuous(const ContinuousSamples& samples, int grid_points = 64,
                                      double rel_tol = 1e-4);

struct ContinuousEvppi {
  IndexEstimate v;
  std::optional<OptimalDecisionMap> map;  // smoothed_profile mode only
};

/// EVPPI of one factor (or, in closed-form modes, a pair) for a continuous
/// decision. smoothed_profile needs the augmented table.
ContinuousEvppi evppi_continuous(const ContinuousSamples& samples, const AugmentedTable* augmented,
                                 const std::vector<std::string>& factors, double a_opt,
                                 const ContinuousVoiOptions& options = {});

struct ContinuousPerfectInfo {
  IndexEstimate value;
  std::size_t excluded = 0;  // rows without a defined optimum under certainty
};

/// Mean of u(x, a_opt|x) - u(x, a_opt) using the per-sample optimum under
/// certainty.
ContinuousPerfectInfo evpi_continuous(const ContinuousSamples& samples, double a_opt);
/// Same on aleatory-reduced samples; StateError otherwise.
ContinuousPerfectInfo evpm_continuous(const ContinuousSamples& samples, double a_opt);

/// Column of u(x, a) at a fixed decision.
std::vector<double> utility_at(const ContinuousSamples& samples, double a);

struct ContinuousAnalysisOptions {
  std::vector<std::vector<std::string>> groups;
  ContinuousVoiOptions voi;
  Normalizer normalizer = Normalizer::evpm;
};

struct ContinuousAnalysis {
  VoiReport report;
  std::vector<OptimalDecisionMap> maps;
};

ContinuousAnalysis analyze_continuous(const ContinuousSamples& samples, const ContinuousAnalysisOptions& options,
                                      const RandomSource& src);

}  // namespace voi
