#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "voi/decision_model.hpp"
#include "voi/prob.hpp"
#include "voi/sample_table.hpp"
#include "voi/voi_engine.hpp"

namespace voi {

/// Decision problem whose utility depends on the inputs only through a
/// failure indicator.
///
/// failure_samples holds draws of the factors conditional on failure, with a
/// "decision" column (1-based) telling which alternative they belong to.
struct RareEventProblem {
  std::vector<FactorSpec> factors;  // prior marginals of the conditioning factors
  std::vector<double> p_failure;    // prior failure probability per decision
  std::vector<double> u_failure;    // u(1, a)
  std::vector<double> u_survival;   // u(0, a)
  SampleTable failure_samples;

  std::size_t decision_count() const noexcept { return p_failure.size(); }
  /// Checks sizes, probabilities in (0, 1) and that every decision has
  /// failure samples. ConfigError / SchemaError.
  void validate() const;
};

/// u(1, a) p + u(0, a) (1 - p).
double expected_utility_rare(double p_failure_conditional, double u_failure, double u_survival);

/// Gaussian kernel density estimate; bandwidth defaults to Silverman's rule.
class GaussianKde {
 public:
  explicit GaussianKde(std::vector<double> data, std::optional<double> bandwidth = std::nullopt);

  double pdf(double x) const;
  double bandwidth() const noexcept { return h_; }
  std::size_t size() const noexcept { return data_.size(); }

 private:
  std::vector<double> data_;  // sorted
  double h_;
};

/// x -> Pr(F | X_i = x) for one decision, by the density ratio
/// p_F f(x | F) / f(x), clipped to [0, 1].
class ConditionalFailureModel {
 public:
  ConditionalFailureModel(const RareEventProblem& problem, const std::string& factor, std::size_t decision = 0);

  /// DomainError where the prior density is below 1e-300.
  double operator()(double x) const;
  /// Set when fewer than 200 failure samples are available.
  const std::optional<std::string>& warning() const noexcept { return warning_; }

 private:
  DistributionSpec prior_;
  double p_failure_;
  GaussianKde kde_;
  std::optional<std::string> warning_;
};

double conditional_failure_probability(const RareEventProblem& problem, const std::string& factor, double x,
                                       std::size_t decision = 0);

/// EVPPI of one factor: prior draws of the factor, conditional expected
/// utilities from the mixture, plug-in mean of max_a - a_opt.
IndexEstimate evppi_rare(const RareEventProblem& problem, const std::string& factor, std::size_t n_prior,
                         const RandomSource& src);

/// Failure samples CSV: factor columns plus "decision".
SampleTable read_failure_samples(const std::string& path);

}  // namespace voi
