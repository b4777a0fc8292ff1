#include "voi/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "voi/errors.hpp"

namespace voi {

namespace {

// Nodes and weights of the 15-point Kronrod rule and its embedded 7-point
// Gauss rule on [-1, 1]; node 0 is the centre.
constexpr std::array<double, 8> kXk = {
    0.000000000000000000000000000000000, 0.207784955007898467600689403773245,
    0.405845151377397166906606412076961, 0.586087235467691130294144845693013,
    0.741531185599394439863864773280788, 0.864864423359769072789712788640926,
    0.949107912342758524526189684047851, 0.991455371120812639206854697526329};
constexpr std::array<double, 8> kWk = {
    0.209482141084727828012999174891714, 0.204432940075298892414161999234649,
    0.190350578064785409913256402421014, 0.169004726639267902826583426598550,
    0.140653259715525918745189590510238, 0.104790010322250183839876322541518,
    0.063092092629978553290700663189204, 0.022935322010529224963732008058970};
// Gauss weights at Kronrod nodes 0, 2, 4, 6.
constexpr std::array<double, 4> kWg = {
    0.417959183673469387755102040816327, 0.381830050505118944950369775488975,
    0.279705391489276667901467771423780, 0.129484966168869693270611432679082};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWk[0];
  double g = fc * kWg[0];
  for (int j = 1; j < 8; ++j) {
    const double dx = h * kXk[j];
    const double s = f(c - dx) + f(c + dx);
    k += kWk[j] * s;
    if (j % 2 == 0) g += kWg[j / 2] * s;
  }
  k *= h;
  g *= h;
  double err = std::abs(k - g);
  // Floor the error at the round-off level of the panel.
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * std::abs(k);
  if (err < roundoff) err = 0.0;
  return {a, b, k, err};
}

template <class F>
double adaptive(const F& f, double a, double b, const QuadratureOptions& o) {
  Panel first = kronrod(f, a, b);
  if (!std::isfinite(first.value)) throw NumericError("integrand is not finite", first.value);
  if (first.error <= std::max(o.abs_tol, o.rel_tol * std::abs(first.value))) return first.value;

  std::priority_queue<Panel> heap;
  heap.push(first);
  double total = first.value;
  double total_err = first.error;
  std::size_t intervals = 1;
  while (total_err > std::max(o.abs_tol, o.rel_tol * std::abs(total))) {
    if (intervals >= o.max_intervals) {
      throw NumericError("quadrature did not converge within the interval budget", total);
    }
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw NumericError("quadrature interval collapsed below machine precision", total);
    }
    Panel left = kronrod(f, worst.a, mid);
    Panel right = kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    if (!std::isfinite(total)) throw NumericError("integrand is not finite", total);
    heap.push(left);
    heap.push(right);
    ++intervals;
    // Recompute the error sum periodically to avoid drift from cancellation.
    if (intervals % 64 == 0) {
      std::vector<Panel> tmp;
      tmp.reserve(heap.size());
      double e = 0.0;
      while (!heap.empty()) {
        e += heap.top().error;
        tmp.push_back(heap.top());
        heap.pop();
      }
      for (auto& p : tmp) heap.push(p);
      total_err = e;
    }
  }
  return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lower, double upper,
                 const QuadratureOptions& options) {
  if (!(options.rel_tol > 0) && !(options.abs_tol > 0)) {
    throw DomainError("integrate: a positive tolerance is required");
  }
  if (std::isnan(lower) || std::isnan(upper)) throw DomainError("integrate: NaN bound");
  if (lower == upper) return 0.0;
  if (lower > upper) return -integrate(f, upper, lower, options);

  const bool lo_inf = std::isinf(lower);
  const bool hi_inf = std::isinf(upper);
  if (!lo_inf && !hi_inf) return adaptive(f, lower, upper, options);
  if (lo_inf && hi_inf) {
    // x = t / (1 - t^2), t in (-1, 1)
    auto g = [&](double t) {
      const double d = 1.0 - t * t;
      if (d <= 0) return 0.0;
      const double v = f(t / d) * (1.0 + t * t) / (d * d);
      return std::isfinite(v) ? v : 0.0;
    };
    return adaptive(g, -1.0, 1.0, options);
  }
  if (hi_inf) {
    // x = lower + t / (1 - t), t in [0, 1)
    auto g = [&](double t) {
      const double d = 1.0 - t;
      if (d <= 0) return 0.0;
      const double v = f(lower + t / d) / (d * d);
      return std::isfinite(v) ? v : 0.0;
    };
    return adaptive(g, 0.0, 1.0, options);
  }
  // x = upper - t / (1 - t)
  auto g = [&](double t) {
    const double d = 1.0 - t;
    if (d <= 0) return 0.0;
    const double v = f(upper - t / d) / (d * d);
    return std::isfinite(v) ? v : 0.0;
  };
  return adaptive(g, 0.0, 1.0, options);
}

}  // namespace voi
