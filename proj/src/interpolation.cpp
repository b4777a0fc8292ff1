#include "voi/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "voi/errors.hpp"

namespace voi {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.empty() || x_.size() != y_.size()) throw DomainError("interpolant needs matching, nonempty knots");
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) throw DomainError("interpolation knots must be strictly increasing");
  }
  const std::size_t n = x_.size();
  d_.assign(n, 0.0);
  if (n < 2) return;
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0) continue;
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    const double w1 = 2 * h1 + h0;
    const double w2 = h1 + 2 * h0;
    d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  // One-sided three-point end slopes, limited to keep monotonicity.
  auto end_slope = [](double h0, double h1, double del0, double del1) {
    double d = ((2 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (d * del0 <= 0) {
      d = 0;
    } else if (del0 * del1 <= 0 && std::abs(d) > std::abs(3 * del0)) {
      d = 3 * del0;
    }
    return d;
  };
  d_[0] = end_slope(x_[1] - x_[0], x_[2] - x_[1], delta[0], delta[1]);
  d_[n - 1] = end_slope(x_[n - 1] - x_[n - 2], x_[n - 2] - x_[n - 3], delta[n - 2], delta[n - 3]);
}

double MonotoneCubic::operator()(double x) const {
  if (x_.size() == 1 || x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * d_[i] + (-2 * s3 + 3 * s2) * y_[i + 1] +
         (s3 - s2) * h * d_[i + 1];
}

MaximizeResult maximize_on_interval(const std::function<double(double)>& f, double lower, double upper,
                                    int grid_points, double rel_tol) {
  if (!(upper >= lower)) throw DomainError("maximization interval is empty");
  const double width = upper - lower;
  if (width == 0.0) return {lower, f(lower), true};
  grid_points = std::max(grid_points, 3);
  const double step = width / (grid_points - 1);
  int best = 0;
  double best_value = -INFINITY;
  for (int i = 0; i < grid_points; ++i) {
    const double v = f(lower + step * i);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = lower + step * std::max(best - 1, 0);
  double b = lower + step * std::min(best + 1, grid_points - 1);
  const double tol = rel_tol * width;
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  double v = f(x);
  // The grid point itself may beat the refined interior point at a bound.
  const double grid_x = lower + step * best;
  if (best_value > v) {
    x = grid_x;
    v = best_value;
  }
  const bool at_bound = x - lower <= tol || upper - x <= tol;
  return {x, v, at_bound};
}

}  // namespace voi
