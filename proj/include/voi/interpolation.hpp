#pragma once

#include <functional>
#include <span>
#include <vector>

namespace voi {

/// Shape-preserving piecewise cubic interpolant (Fritsch-Carlson slopes).
/// Monotone data give a monotone interpolant; queries outside the knot range
/// are clamped to the end values.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  /// Knots must be strictly increasing; at least one knot.
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  const std::vector<double>& knots() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return y_; }

 private:
  std::vector<double> x_, y_, d_;
};

struct MaximizeResult {
  double argmax = 0.0;
  double value = 0.0;
  bool at_bound = false;  // optimum within tolerance of lower or upper
};

/// Maximizes f on [lower, upper]: scan of grid_points equally spaced points,
/// then golden-section refinement around the best grid point until the
/// bracket is narrower than rel_tol * (upper - lower).
MaximizeResult maximize_on_interval(const std::function<double(double)>& f, double lower, double upper,
                                    int grid_points = 64, double rel_tol = 1e-4);

}  // namespace voi
