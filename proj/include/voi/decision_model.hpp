#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "voi/prob.hpp"
#include "voi/sample_table.hpp"

namespace voi {

enum class FactorClass { aleatory, epistemic };

struct FactorSpec {
  std::string name;
  DistributionSpec dist;
  FactorClass cls = FactorClass::epistemic;
};

class DecisionSpace {
 public:
  static DecisionSpace discrete(std::vector<std::string> labels);
  static DecisionSpace continuous(double lower, double upper);

  bool is_discrete() const noexcept { return discrete_; }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  DecisionSpace() = default;
  bool discrete_ = true;
  std::vector<std::string> labels_;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

/// Expected exceedance loss c_f * E[(S - r)^+] for a Gumbel load
/// S ~ Gumbel(location, scale). Evaluated as c_f * int_r^inf (1 - F(s)) ds with
/// the substitution u = exp(-(s - location) / scale), relative tolerance 1e-10.
double exceedance_expected_loss(double location, double resistance, double cost_factor,
                                double scale = 1.0);

/// Parameters of the three-alternative protection-system example.
struct DiscreteWorkingExample {
  double load_location_mean = 7.5;
  double load_location_std = 1.0;
  std::vector<double> resistance_means{10.0, 12.0, 14.0};
  double resistance_std = 1.0;
  double cost_factor_mean = 3e7;
  double cost_factor_std = 1e7;
  std::vector<double> costs{13e6, 15e6, 17e6};
};

/// Continuous-design variant: resistance a * X_R, cost a * slope + fixed.
struct ContinuousWorkingExample {
  double load_location_mean = 7.5;
  double load_location_std = 1.0;
  double model_uncertainty_mean = 1.0;
  double model_uncertainty_std = 0.1;
  double cost_factor_mean = 3e7;
  double cost_factor_std = 1e7;
  double cost_slope = 1e6;
  double cost_fixed = 3e6;
  double a_min = 4.0;
  double a_max = 20.0;
};

/// Utilities supplied per sample and decision in "u_a<k>" columns.
struct TabulatedUtility {};

enum class ClosedFormKind { quadratic, linex };

/// u = -c (y - a)^2   or   u = -c {exp[gamma (y - a)] - gamma (y - a) - 1}
/// acting on an outcome column that does not depend on a.
struct ClosedFormUtility {
  ClosedFormKind kind = ClosedFormKind::quadratic;
  double c = 1.0;
  double gamma = 1.0;
  std::string outcome = "y";

  double operator()(double y, double a) const;
};

using UtilityModel =
    std::variant<DiscreteWorkingExample, ContinuousWorkingExample, TabulatedUtility, ClosedFormUtility>;

struct Problem {
  std::vector<FactorSpec> factors;
  DecisionSpace decisions = DecisionSpace::discrete({"a1", "a2"});
  UtilityModel utility = TabulatedUtility{};

  const FactorSpec& factor(const std::string& name) const;  // ConfigError if absent
  std::vector<std::string> epistemic_names() const;
  std::vector<std::string> aleatory_names() const;
};

/// Factor set and decision space of the built-in examples. The aleatory load
/// "S" is listed with its nominal location; the models condition it on M.
Problem working_example_discrete(const DiscreteWorkingExample& p = {});
Problem working_example_continuous(const ContinuousWorkingExample& p = {});

/// Checks unique factor names, decision-space shape and utility/decision
/// consistency. Throws ConfigError.
void validate(const Problem& problem);

/// Draws n samples of every epistemic factor. Factor j uses substream j of src.
SampleTable sample_epistemic(const Problem& problem, std::size_t n, const RandomSource& src);

/// Per-sample utility of a continuous decision.
using RowUtility = std::function<double(std::size_t row, double a)>;
/// Per-sample optimal decision under certainty, nullopt where undefined.
using RowOptimum = std::function<std::optional<double>(std::size_t row)>;

struct ContinuousSamples {
  SampleTable table;
  double a_min = 0.0;
  double a_max = 1.0;
  RowUtility utility;
  RowOptimum deterministic_optimum;
  std::optional<ClosedFormUtility> closed_form;
};

/// Fills per-decision utility columns for a discrete problem.
///
/// Built-in model: the aleatory load is integrated out by quadrature (the
/// table is marked aleatory-reduced) unless full_model is set, in which case
/// the load is sampled per row into column "S" and the loss is realized.
/// Outcome columns "y_a<k>" hold the (expected) loss. Tabulated model: the
/// input is returned unchanged after checking every "u_a<k>" column exists.
SampleTable evaluate_utilities(const Problem& problem, const SampleTable& samples,
                               const RandomSource& src, bool full_model = false);

/// Continuous counterpart: keeps the samples and attaches the per-sample
/// utility as a function of a. Closed-form models read the outcome column.
ContinuousSamples evaluate_continuous_utilities(const Problem& problem, const SampleTable& samples,
                                                const RandomSource& src, bool full_model = false);

/// Column means of the utility columns.
std::vector<double> prior_expected_utilities(const SampleTable& table);
/// argmax of expected utility, ties to the lowest index.
std::size_t prior_optimum(std::span<const double> expected_utilities);
std::size_t prior_optimum(const SampleTable& table);

/// Index of the largest entry, ties to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace voi
