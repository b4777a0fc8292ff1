#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voi/prob.hpp"
#include "voi/sample_table.hpp"
#include "voi/smoothing.hpp"

namespace voi {

/// A Monte Carlo index with its standard error.
///
/// raw is the plain estimate. value is the reported figure: raw clipped at
/// zero and set to 0 when |raw| < 2 se. defined is false when the index has
/// no meaning for the input (e.g. zero output variance).
struct IndexEstimate {
  double value = 0.0;
  double raw = 0.0;
  double se = 0.0;
  bool defined = true;
};

/// Mean and standard error of per-sample contributions, with the noise floor
/// applied to value.
IndexEstimate summarize_contributions(std::span<const double> contributions);

enum class EvppiEstimator { plugin, reoptimize };
std::string_view to_string(EvppiEstimator e);
EvppiEstimator parse_evppi_estimator(std::string_view name);

enum class Normalizer { evpi, evpm };
std::string_view to_string(Normalizer n);
Normalizer parse_normalizer(std::string_view name);

struct EvppiOptions {
  EvppiEstimator estimator = EvppiEstimator::reoptimize;
  SmootherConfig smoother;
};

/// One smoother of u(., a) per decision alternative over the given
/// conditioning columns (one or two).
std::vector<Smoother> fit_decision_smoothers(const SampleTable& table,
                                             const std::vector<std::span<const double>>& conditioning,
                                             const SmootherConfig& cfg);

/// x -> max_a S(x, a) - S(x, a_opt) for a single conditioning factor.
class CvppiProfile {
 public:
  /// StateError when a_opt is unset; DomainError when it is out of range.
  CvppiProfile(std::vector<Smoother> smoothers, std::optional<std::size_t> a_opt);

  double operator()(double x) const;
  /// Conditionally optimal alternative (ties resolved toward a_opt).
  std::size_t best_decision(double x) const;
  std::size_t a_opt() const noexcept { return a_opt_; }

 private:
  std::vector<Smoother> smoothers_;
  std::size_t a_opt_;
};

CvppiProfile cvppi_profile(const SampleTable& table, const std::string& factor, const SmootherConfig& cfg,
                           std::optional<std::size_t> a_opt);

/// Result of conditioning on one factor or a group of up to two factors.
struct ConditionalAnalysis {
  IndexEstimate v;        // EVPPI with the requested estimator
  IndexEstimate v_other;  // EVPPI with the other estimator (diagnostic)
  IndexEstimate dc;       // decision-change probability, binomial SE
  std::vector<std::size_t> conditional_decision;  // per sample
};

/// EVPPI and decision-change probability from explicit conditioning columns.
/// Throws DomainError for more than two columns.
ConditionalAnalysis analyze_conditioning(const SampleTable& table,
                                         const std::vector<std::span<const double>>& conditioning,
                                         const EvppiOptions& options, std::size_t a_opt);

/// EVPPI of a factor or group (|group| <= 2) against the table's prior optimum.
IndexEstimate evppi(const SampleTable& table, const std::vector<std::string>& factors,
                    const EvppiOptions& options = {});
double decision_change_probability(const SampleTable& table, const std::vector<std::string>& factors,
                                   const SmootherConfig& cfg = {});

/// Expected value of perfect information: mean of max_a u - u(a_opt).
IndexEstimate evpi(const SampleTable& table);
/// EVPI of an aleatory-reduced table; StateError on a table with the aleatory
/// factors realized.
IndexEstimate evpm(const SampleTable& table);

/// V / normalizer, or nullopt when the normalizer is zero after the noise floor.
std::optional<double> relative_iv(double v, const IndexEstimate& normalizer);

/// Statistic of n_s observations generated given the factor value. The
/// stream is private to the sample row.
using StatisticSampler = std::function<double(double factor_value, std::size_t n_s, const RandomSource& row_stream)>;

/// Monotone transform ln(sum exp(-s_i / scale)) of the sufficient statistic
/// of n_s Gumbel(location, scale) observations, drawn without simulating the
/// individual observations' order.
StatisticSampler gumbel_location_statistic(double scale = 1.0);

/// EVPPI of the statistic Z of n_s observations about one factor. n_s = 0
/// returns exactly zero.
IndexEstimate sample_information_value(const SampleTable& table, const std::string& factor, std::size_t n_s,
                                       const StatisticSampler& statistic, const RandomSource& src,
                                       const EvppiOptions& options = {});

/// Var[S(x_i)] / Var[y], S the smoother of y on x_i. Delta-method SE;
/// undefined when y has zero variance.
IndexEstimate sobol_first_order(const SampleTable& table, const std::string& factor, std::span<const double> y,
                                const SmootherConfig& cfg = {});
IndexEstimate sobol_first_order(const SampleTable& table, const std::string& factor, const std::string& output,
                                const SmootherConfig& cfg = {});

struct FactorResult {
  std::string name;  // factor name, or "A+B" for a group
  std::vector<std::string> factors;
  IndexEstimate v;
  IndexEstimate v_other;
  std::optional<double> relative_v;
  std::optional<IndexEstimate> dc;  // discrete decisions only
  IndexEstimate sobol;
};

struct SampleInformationPoint {
  std::string factor;
  std::size_t n_s = 0;
  IndexEstimate v;
};

/// All indices for one problem.
struct VoiReport {
  bool discrete = true;
  std::vector<FactorResult> factors;
  std::vector<std::string> decision_labels;
  std::vector<double> expected_utilities;  // discrete only
  std::size_t a_opt_index = 0;             // discrete only
  double a_opt = 0.0;                      // continuous value or 1-based index
  double prior_expected_utility = 0.0;
  IndexEstimate evpi;
  std::optional<IndexEstimate> evpm;
  std::optional<IndexEstimate> evpi_full_model;
  std::vector<FactorResult> full_model_factors;  // factors of the model with aleatory inputs realized
  Normalizer normalizer = Normalizer::evpm;
  std::vector<SampleInformationPoint> sample_information;

  // diagnostics
  std::size_t n = 0;
  std::uint64_t seed = 0;
  EvppiEstimator estimator = EvppiEstimator::reoptimize;
  SmootherConfig smoother;
  std::vector<std::string> warnings;
  std::map<std::string, double> extra;
};

struct DiscreteAnalysisOptions {
  std::vector<std::vector<std::string>> groups;  // each entry: one factor or a pair
  EvppiOptions evppi;
  Normalizer normalizer = Normalizer::evpm;
};

/// Runs the discrete-decision stack on a table with "u_a<k>" columns.
VoiReport analyze_discrete(const SampleTable& table, const DiscreteAnalysisOptions& options);

}  // namespace voi
