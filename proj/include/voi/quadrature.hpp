#pragma once

#include <cstddef>
#include <functional>

namespace voi {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_intervals = 4000;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature of f over
/// [lower, upper]. Either bound may be infinite; infinite ranges are mapped
/// onto finite ones by rational substitution. Throws NumericError (carrying
/// the best estimate) when the tolerance is not met within max_intervals.
double integrate(const std::function<double(double)>& f, double lower, double upper,
                 const QuadratureOptions& options = {});

inline double integrate(const std::function<double(double)>& f, double lower, double upper,
                        double rel_tol) {
  QuadratureOptions o;
  o.rel_tol = rel_tol;
  return integrate(f, lower, upper, o);
}

}  // namespace voi
