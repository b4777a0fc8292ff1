#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace voi {

enum class SmootherMethod { moving_average, linear, loess, kernel };

std::string_view to_string(SmootherMethod m);
SmootherMethod parse_smoother_method(std::string_view name);

/// Settings of a conditional-expectation smoother.
///
/// span      fraction of the points used by each local LOESS fit
/// bandwidth window half-width (moving average) or Gaussian kernel standard
///           deviation (kernel); in units of x for one conditioning variable
///           and in standardized units for two. Unset: rule of thumb.
/// degree    local polynomial degree of LOESS (1 or 2)
struct SmootherConfig {
  SmootherMethod method = SmootherMethod::loess;
  double span = 0.3;
  std::optional<double> bandwidth;
  int degree = 2;

  void validate() const;  // ConfigError
};

/// Fitted estimator of E[y | x] for one or two conditioning variables.
///
/// Immutable after fit and cheap to copy (shared state), so one instance can
/// be queried from several threads. Queries outside the bounding box of the
/// training inputs are clamped onto it.
class Smoother {
 public:
  /// One conditioning variable. Requires n >= 20 and nonzero spread in x.
  static Smoother fit(std::span<const double> x, std::span<const double> y, const SmootherConfig& cfg);
  /// Two conditioning variables (each standardized to unit interquartile range).
  static Smoother fit(std::span<const double> x1, std::span<const double> x2, std::span<const double> y,
                      const SmootherConfig& cfg);
  /// Generic form: one span per conditioning variable.
  static Smoother fit(const std::vector<std::span<const double>>& x, std::span<const double> y,
                      const SmootherConfig& cfg);

  std::size_t dimension() const noexcept;
  const SmootherConfig& config() const noexcept;
  /// Bounding box of the training inputs along one axis.
  std::pair<double, double> range(std::size_t axis) const;

  double predict(double x) const;
  double predict(double x1, double x2) const;
  double predict(std::span<const double> point) const;  // DomainError on dimension mismatch

  std::vector<double> predict_batch(std::span<const double> x) const;
  std::vector<double> predict_batch(std::span<const double> x1, std::span<const double> x2) const;

  class Impl;

 private:
  explicit Smoother(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace voi
