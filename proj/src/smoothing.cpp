#include "voi/smoothing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "voi/errors.hpp"
#include "voi/parallel.hpp"

namespace voi {

std::string_view to_string(SmootherMethod m) {
  switch (m) {
    case SmootherMethod::moving_average: return "moving_average";
    case SmootherMethod::linear: return "linear";
    case SmootherMethod::loess: return "loess";
    case SmootherMethod::kernel: return "kernel";
  }
  return "unknown";
}

SmootherMethod parse_smoother_method(std::string_view name) {
  if (name == "moving_average") return SmootherMethod::moving_average;
  if (name == "linear") return SmootherMethod::linear;
  if (name == "loess") return SmootherMethod::loess;
  if (name == "kernel") return SmootherMethod::kernel;
  throw ConfigError("unknown smoother method '" + std::string(name) + "'");
}

void SmootherConfig::validate() const {
  if (!(span > 0.0 && span <= 1.0)) throw ConfigError("smoother span must lie in (0, 1]");
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw ConfigError("smoother bandwidth must be positive");
  }
  if (degree != 1 && degree != 2) throw ConfigError("loess degree must be 1 or 2");
}

namespace {

constexpr std::size_t kMinPoints = 20;
constexpr std::size_t kVertices1d = 129;
constexpr std::size_t kVertices2d = 25;

double quantile_sorted(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= s.size()) return s.back();
  const double f = pos - static_cast<double>(i);
  return s[i] + f * (s[i + 1] - s[i]);
}

double stddev_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Spread used by the rule-of-thumb bandwidth: min(sd, IQR / 1.349), falling
// back to sd when the IQR vanishes.
double robust_spread(std::span<const double> v, const std::vector<double>& sorted) {
  const double sd = stddev_of(v);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double r = iqr / 1.349;
  return r > 0 ? std::min(sd, r) : sd;
}

// Union of an equally spaced grid and a grid of empirical quantiles, so that
// both sparse tails and dense regions get vertices.
std::vector<double> make_vertices(const std::vector<double>& sorted, std::size_t count) {
  const double lo = sorted.front();
  const double hi = sorted.back();
  std::vector<double> v;
  v.reserve(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    v.push_back(lo + f * (hi - lo));
    v.push_back(quantile_sorted(sorted, f));
  }
  std::sort(v.begin(), v.end());
  // Merge near-coincident vertices (uniform and quantile grids overlap for
  // evenly spread data).
  const double tol = 0.2 * (hi - lo) / static_cast<double>(count - 1);
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  }
  out.back() = hi;
  out.front() = lo;
  return out;
}

double tricube(double r) {
  if (r >= 1.0) return 0.0;
  const double c = 1.0 - r * r * r;
  return c * c * c;
}

// Cubic Hermite basis on [0, 1].
struct Hermite {
  double h00, h10, h01, h11;
  explicit Hermite(double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    h00 = 2 * s3 - 3 * s2 + 1;
    h10 = s3 - 2 * s2 + s;
    h01 = -2 * s3 + 3 * s2;
    h11 = s3 - s2;
  }
};

// Locates the cell [v[i], v[i+1]] containing x (x already clamped).
std::size_t cell_of(const std::vector<double>& v, double x) {
  if (v.size() < 2) return 0;
  auto it = std::upper_bound(v.begin(), v.end(), x);
  std::size_t i = it == v.begin() ? 0 : static_cast<std::size_t>(it - v.begin()) - 1;
  return std::min(i, v.size() - 2);
}

}  // namespace

class Smoother::Impl {
 public:
  virtual ~Impl() = default;

  std::size_t dim = 1;
  SmootherConfig cfg;
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};

  double predict(const double* p) const {
    std::array<double, 2> q{};
    for (std::size_t j = 0; j < dim; ++j) q[j] = std::clamp(p[j], lo[j], hi[j]);
    return eval(q.data());
  }

 protected:
  virtual double eval(const double* p) const = 0;
};

namespace {

using Impl = Smoother::Impl;

// ---------------------------------------------------------------- 1-d ----

struct Sorted1d {
  std::vector<double> x;
  std::vector<double> y;  // shifted by y0
  double y0 = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;
};

Sorted1d sort_pairs(std::span<const double> x, std::span<const double> y) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  Sorted1d s;
  s.x.resize(x.size());
  s.y.resize(x.size());
  // Reference level: working with y - y0 makes constant data exact.
  s.y0 = y[idx[0]];
  s.ymin = *std::min_element(y.begin(), y.end());
  s.ymax = *std::max_element(y.begin(), y.end());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    s.x[i] = x[idx[i]];
    s.y[i] = y[idx[i]] - s.y0;
  }
  return s;
}

class Linear1d final : public Impl {
 public:
  double y0 = 0, xbar = 0, intercept = 0, slope = 0;

 protected:
  double eval(const double* p) const override { return y0 + intercept + slope * (p[0] - xbar); }
};

class MovingAverage1d final : public Impl {
 public:
  Sorted1d d;
  std::vector<double> prefix;  // prefix[i] = sum of d.y[0..i)
  double half_width = 0;

 protected:
  double eval(const double* p) const override {
    const double x = p[0];
    const auto b = std::lower_bound(d.x.begin(), d.x.end(), x - half_width) - d.x.begin();
    const auto e = std::upper_bound(d.x.begin(), d.x.end(), x + half_width) - d.x.begin();
    double v;
    if (e > b) {
      v = d.y0 + (prefix[static_cast<std::size_t>(e)] - prefix[static_cast<std::size_t>(b)]) /
                     static_cast<double>(e - b);
    } else {
      // Empty window: nearest training point.
      const auto i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(b, static_cast<std::ptrdiff_t>(d.x.size()) - 1));
      const std::size_t j = i > 0 && (x - d.x[i - 1]) <= (d.x[i] - x) ? i - 1 : i;
      v = d.y0 + d.y[j];
    }
    return std::clamp(v, d.ymin, d.ymax);
  }
};

// Piecewise-linear interpolant of vertex values; keeps convex-combination
// bounds of the vertex estimator.
class Vertex1dLinear final : public Impl {
 public:
  std::vector<double> vx, vf;
  double ymin = 0, ymax = 0;

 protected:
  double eval(const double* p) const override {
    if (vx.size() == 1) return vf[0];
    const std::size_t i = cell_of(vx, p[0]);
    const double t = (p[0] - vx[i]) / (vx[i + 1] - vx[i]);
    return std::clamp(vf[i] + t * (vf[i + 1] - vf[i]), ymin, ymax);
  }
};

// Cubic Hermite interpolant of vertex values and slopes.
class Vertex1dHermite final : public Impl {
 public:
  std::vector<double> vx, vf, vd;
  double y0 = 0;

 protected:
  double eval(const double* p) const override {
    if (vx.size() == 1) return y0 + vf[0];
    const std::size_t i = cell_of(vx, p[0]);
    const double h = vx[i + 1] - vx[i];
    const Hermite b((p[0] - vx[i]) / h);
    return y0 + b.h00 * vf[i] + b.h10 * h * vd[i] + b.h01 * vf[i + 1] + b.h11 * h * vd[i + 1];
  }
};

struct LocalFit {
  double value;
  double slope;
};

// Weighted local polynomial at v using the q nearest points of sorted data.
LocalFit loess_local_1d(const Sorted1d& d, double v, std::size_t q, int degree) {
  const std::size_t n = d.x.size();
  std::size_t b = static_cast<std::size_t>(std::lower_bound(d.x.begin(), d.x.end(), v) - d.x.begin());
  std::size_t e = b;
  while (e - b < q) {
    if (b == 0) {
      ++e;
    } else if (e == n) {
      --b;
    } else if (v - d.x[b - 1] <= d.x[e] - v) {
      --b;
    } else {
      ++e;
    }
  }
  double radius = std::max(v - d.x[b], d.x[e - 1] - v);
  // Points tied at the radius would get zero weight; include them all and
  // widen slightly so the outermost points still count.
  while (b > 0 && v - d.x[b - 1] <= radius) --b;
  while (e < n && d.x[e] - v <= radius) ++e;
  radius *= 1.0 + 1e-6;
  if (!(radius > 0)) {
    double s = 0;
    for (std::size_t i = b; i < e; ++i) s += d.y[i];
    return {s / static_cast<double>(e - b), 0.0};
  }

  // Moments sum w t^k (k <= 4) and sum w y t^k (k <= 2), t = (x - v) / radius.
  std::array<double, 5> sw{};
  std::array<double, 3> swy{};
  for (std::size_t i = b; i < e; ++i) {
    const double t = (d.x[i] - v) / radius;
    const double w = tricube(std::abs(t));
    if (w == 0) continue;
    const double t2 = t * t;
    sw[0] += w;
    sw[1] += w * t;
    sw[2] += w * t2;
    sw[3] += w * t2 * t;
    sw[4] += w * t2 * t2;
    swy[0] += w * d.y[i];
    swy[1] += w * d.y[i] * t;
    swy[2] += w * d.y[i] * t2;
  }
  for (int deg = degree; deg >= 1; --deg) {
    const int m = deg + 1;
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd rhs(m);
    for (int r = 0; r < m; ++r) {
      rhs(r) = swy[static_cast<std::size_t>(r)];
      for (int c = 0; c < m; ++c) a(r, c) = sw[static_cast<std::size_t>(r + c)];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) continue;
    const Eigen::VectorXd beta = ldlt.solve(rhs);
    return {beta(0), beta(1) / radius};
  }
  return {swy[0] / sw[0], 0.0};
}

double kernel_vertex_1d(const Sorted1d& d, double v, double h) {
  const double reach = 7.0 * h;
  const auto b = std::lower_bound(d.x.begin(), d.x.end(), v - reach) - d.x.begin();
  const auto e = std::upper_bound(d.x.begin(), d.x.end(), v + reach) - d.x.begin();
  double sw = 0, swy = 0;
  for (auto i = b; i < e; ++i) {
    const double z = (d.x[static_cast<std::size_t>(i)] - v) / h;
    const double w = std::exp(-0.5 * z * z);
    sw += w;
    swy += w * d.y[static_cast<std::size_t>(i)];
  }
  if (sw > 1e-300) return swy / sw;
  // No mass nearby: nearest point.
  const auto it = std::lower_bound(d.x.begin(), d.x.end(), v);
  std::size_t j = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - d.x.begin(), static_cast<std::ptrdiff_t>(d.x.size()) - 1));
  if (j > 0 && v - d.x[j - 1] <= d.x[j] - v) --j;
  return d.y[j];
}

std::shared_ptr<Impl> fit_1d(std::span<const double> x, std::span<const double> y, const SmootherConfig& cfg) {
  const std::size_t n = x.size();
  Sorted1d d = sort_pairs(x, y);
  if (!(d.x.back() > d.x.front())) throw FitError("conditioning variable has zero variance");

  switch (cfg.method) {
    case SmootherMethod::linear: {
      auto s = std::make_shared<Linear1d>();
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < n; ++i) {
        mx += d.x[i];
        my += d.y[i];
      }
      mx /= static_cast<double>(n);
      my /= static_cast<double>(n);
      double sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        sxx += (d.x[i] - mx) * (d.x[i] - mx);
        sxy += (d.x[i] - mx) * (d.y[i] - my);
      }
      if (!(sxx > 0)) throw FitError("conditioning variable has zero variance");
      s->y0 = d.y0;
      s->xbar = mx;
      s->slope = sxy / sxx;
      s->intercept = my;
      return s;
    }
    case SmootherMethod::moving_average: {
      auto s = std::make_shared<MovingAverage1d>();
      const double h = cfg.bandwidth ? *cfg.bandwidth
                                     : 0.9 * robust_spread(x, d.x) * std::pow(static_cast<double>(n), -0.2);
      s->half_width = h;
      s->prefix.resize(n + 1, 0.0);
      for (std::size_t i = 0; i < n; ++i) s->prefix[i + 1] = s->prefix[i] + d.y[i];
      s->d = std::move(d);
      return s;
    }
    case SmootherMethod::kernel: {
      auto s = std::make_shared<Vertex1dLinear>();
      const double h = cfg.bandwidth ? *cfg.bandwidth
                                     : 0.9 * robust_spread(x, d.x) * std::pow(static_cast<double>(n), -0.2);
      s->vx = make_vertices(d.x, 4 * kVertices1d);
      s->vf.resize(s->vx.size());
      parallel_for(s->vx.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) s->vf[i] = d.y0 + kernel_vertex_1d(d, s->vx[i], h);
      });
      s->ymin = d.ymin;
      s->ymax = d.ymax;
      return s;
    }
    case SmootherMethod::loess: {
      auto s = std::make_shared<Vertex1dHermite>();
      const auto q = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(cfg.span * static_cast<double>(n))),
                                             static_cast<std::size_t>(cfg.degree) + 2, n);
      s->vx = make_vertices(d.x, kVertices1d);
      s->vf.resize(s->vx.size());
      s->vd.resize(s->vx.size());
      s->y0 = d.y0;
      parallel_for(s->vx.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const LocalFit f = loess_local_1d(d, s->vx[i], q, cfg.degree);
          s->vf[i] = f.value;
          s->vd[i] = f.slope;
        }
      });
      return s;
    }
  }
  throw FitError("unsupported smoother method");
}

// ---------------------------------------------------------------- 2-d ----

struct Standardized2d {
  std::array<double, 2> center{};
  std::array<double, 2> scale{};
  std::vector<double> z1, z2, y;  // y shifted by y0
  double y0 = 0, ymin = 0, ymax = 0;
  std::array<std::vector<double>, 2> sorted;  // sorted standardized coordinates
};

Standardized2d standardize(std::span<const double> x1, std::span<const double> x2, std::span<const double> y) {
  Standardized2d s;
  const std::size_t n = y.size();
  const std::array<std::span<const double>, 2> xs{x1, x2};
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> srt(xs[j].begin(), xs[j].end());
    std::sort(srt.begin(), srt.end());
    if (!(srt.back() > srt.front())) throw FitError("conditioning variable " + std::to_string(j + 1) + " has zero variance");
    double scale = quantile_sorted(srt, 0.75) - quantile_sorted(srt, 0.25);
    if (!(scale > 0)) scale = stddev_of(xs[j]);
    s.center[j] = quantile_sorted(srt, 0.5);
    s.scale[j] = scale;
    for (auto& v : srt) v = (v - s.center[j]) / scale;
    s.sorted[j] = std::move(srt);
  }
  s.z1.resize(n);
  s.z2.resize(n);
  s.y.resize(n);
  s.y0 = y[0];
  s.ymin = *std::min_element(y.begin(), y.end());
  s.ymax = *std::max_element(y.begin(), y.end());
  for (std::size_t i = 0; i < n; ++i) {
    s.z1[i] = (x1[i] - s.center[0]) / s.scale[0];
    s.z2[i] = (x2[i] - s.center[1]) / s.scale[1];
    s.y[i] = y[i] - s.y0;
  }
  return s;
}

class Linear2d final : public Impl {
 public:
  double y0 = 0;
  std::array<double, 3> beta{};  // intercept at the mean, two slopes
  std::array<double, 2> mean{};

 protected:
  double eval(const double* p) const override {
    return y0 + beta[0] + beta[1] * (p[0] - mean[0]) + beta[2] * (p[1] - mean[1]);
  }
};

// Grid of vertices in standardized coordinates.
class Vertex2d : public Impl {
 public:
  std::array<double, 2> center{}, scale{};
  std::vector<double> g1, g2;  // vertex coordinates per axis
  double y0 = 0;

  std::size_t at(std::size_t i, std::size_t j) const { return i * g2.size() + j; }
};

class Vertex2dBilinear final : public Vertex2d {
 public:
  std::vector<double> f;
  double ymin = 0, ymax = 0;

 protected:
  double eval(const double* p) const override {
    const double z1 = (p[0] - center[0]) / scale[0];
    const double z2 = (p[1] - center[1]) / scale[1];
    const std::size_t i = cell_of(g1, z1);
    const std::size_t j = cell_of(g2, z2);
    const double s = g1.size() > 1 ? (z1 - g1[i]) / (g1[i + 1] - g1[i]) : 0.0;
    const double t = g2.size() > 1 ? (z2 - g2[j]) / (g2[j + 1] - g2[j]) : 0.0;
    const std::size_t i1 = std::min(i + 1, g1.size() - 1);
    const std::size_t j1 = std::min(j + 1, g2.size() - 1);
    const double v = (1 - s) * (1 - t) * f[at(i, j)] + s * (1 - t) * f[at(i1, j)] + (1 - s) * t * f[at(i, j1)] +
                     s * t * f[at(i1, j1)];
    return std::clamp(y0 + v, ymin, ymax);
  }
};

// Bicubic Hermite patches from values, gradients and cross derivatives.
class Vertex2dHermite final : public Vertex2d {
 public:
  std::vector<double> f, fx, fy, fxy;

 protected:
  double eval(const double* p) const override {
    const double z1 = (p[0] - center[0]) / scale[0];
    const double z2 = (p[1] - center[1]) / scale[1];
    const std::size_t i = cell_of(g1, z1);
    const std::size_t j = cell_of(g2, z2);
    const double hx = g1[i + 1] - g1[i];
    const double hy = g2[j + 1] - g2[j];
    const Hermite bx((z1 - g1[i]) / hx);
    const Hermite by((z2 - g2[j]) / hy);
    const std::array<double, 2> vx{bx.h00, bx.h01};
    const std::array<double, 2> dx{bx.h10 * hx, bx.h11 * hx};
    const std::array<double, 2> vy{by.h00, by.h01};
    const std::array<double, 2> dy{by.h10 * hy, by.h11 * hy};
    double sum = 0;
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) {
        const std::size_t k = at(i + a, j + b);
        sum += f[k] * vx[a] * vy[b] + fx[k] * dx[a] * vy[b] + fy[k] * vx[a] * dy[b] + fxy[k] * dx[a] * dy[b];
      }
    }
    return y0 + sum;
  }
};

// Value of the weighted local polynomial at (v1, v2).
double loess_local_2d(const Standardized2d& s, double v1, double v2, std::size_t q, int degree,
                          std::vector<double>& dist2, std::vector<double>& scratch) {
  const std::size_t n = s.y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = s.z1[i] - v1;
    const double b = s.z2[i] - v2;
    dist2[i] = a * a + b * b;
  }
  scratch.assign(dist2.begin(), dist2.end());
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(q - 1), scratch.end());
  double radius = std::sqrt(scratch[q - 1]) * (1.0 + 1e-6);
  if (!(radius > 0)) radius = 1e-12;
  const double r2max = radius * radius;
  const double inv = 1.0 / radius;

  // Basis 1, t1, t2, t1^2, t1 t2, t2^2 with t = (z - v) / radius.
  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    if (dist2[i] >= r2max) continue;
    const double w = tricube(std::sqrt(dist2[i]) * inv);
    const double t1 = (s.z1[i] - v1) * inv;
    const double t2 = (s.z2[i] - v2) * inv;
    const std::array<double, 6> phi{1.0, t1, t2, t1 * t1, t1 * t2, t2 * t2};
    for (int r0 = 0; r0 < 6; ++r0) {
      const double wp = w * phi[static_cast<std::size_t>(r0)];
      rhs(r0) += wp * s.y[i];
      for (int c = r0; c < 6; ++c) a(r0, c) += wp * phi[static_cast<std::size_t>(c)];
    }
  }
  for (int r0 = 0; r0 < 6; ++r0) {
    for (int c = 0; c < r0; ++c) a(r0, c) = a(c, r0);
  }
  for (int deg = degree; deg >= 1; --deg) {
    const int m = deg == 2 ? 6 : 3;
    const Eigen::MatrixXd sub = a.topLeftCorner(m, m);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) continue;
    const Eigen::VectorXd beta = ldlt.solve(rhs.head(m));
    return beta(0);
  }
  return a(0, 0) > 0 ? rhs(0) / a(0, 0) : 0.0;
}

// Three-point derivative of values on a non-uniform grid.
std::vector<double> grid_derivative(const std::vector<double>& g, const std::vector<double>& v) {
  const std::size_t n = g.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (v[1] - v[0]) / (g[1] - g[0]);
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = g[i] - g[i - 1];
    const double h1 = g[i + 1] - g[i];
    d[i] = (h0 * h0 * v[i + 1] - h1 * h1 * v[i - 1] + (h1 * h1 - h0 * h0) * v[i]) / (h0 * h1 * (h0 + h1));
  }
  d[0] = (v[1] - v[0]) / (g[1] - g[0]);
  d[n - 1] = (v[n - 1] - v[n - 2]) / (g[n - 1] - g[n - 2]);
  return d;
}

void grid_slopes(Vertex2dHermite& s) {
  const std::size_t n1 = s.g1.size(), n2 = s.g2.size();
  std::vector<double> line;
  for (std::size_t i = 0; i < n1; ++i) {
    line.assign(s.f.begin() + static_cast<std::ptrdiff_t>(i * n2), s.f.begin() + static_cast<std::ptrdiff_t>((i + 1) * n2));
    const auto d = grid_derivative(s.g2, line);
    for (std::size_t j = 0; j < n2; ++j) s.fy[i * n2 + j] = d[j];
  }
  for (std::size_t j = 0; j < n2; ++j) {
    std::vector<double> col(n1), coly(n1);
    for (std::size_t i = 0; i < n1; ++i) {
      col[i] = s.f[i * n2 + j];
      coly[i] = s.fy[i * n2 + j];
    }
    const auto dx = grid_derivative(s.g1, col);
    const auto dxy = grid_derivative(s.g1, coly);
    for (std::size_t i = 0; i < n1; ++i) {
      s.fx[i * n2 + j] = dx[i];
      s.fxy[i * n2 + j] = dxy[i];
    }
  }
}

template <class V>
void init_vertex_grid(V& v, const Standardized2d& s, std::size_t per_axis) {
  v.center = s.center;
  v.scale = s.scale;
  v.y0 = s.y0;
  v.g1 = make_vertices(s.sorted[0], per_axis);
  v.g2 = make_vertices(s.sorted[1], per_axis);
}

std::shared_ptr<Impl> fit_2d(std::span<const double> x1, std::span<const double> x2, std::span<const double> y,
                             const SmootherConfig& cfg) {
  const std::size_t n = y.size();
  if (cfg.method == SmootherMethod::linear) {
    auto s = std::make_shared<Linear2d>();
    s->y0 = y[0];
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    double m1 = 0, m2 = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m1 += x1[i];
      m2 += x2[i];
      my += y[i] - s->y0;
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d phi(1.0, x1[i] - m1, x2[i] - m2);
      a += phi * phi.transpose();
      rhs += phi * (y[i] - s->y0 - my);
    }
    if (!(a(1, 1) > 0) || !(a(2, 2) > 0)) throw FitError("conditioning variable has zero variance");
    Eigen::LDLT<Eigen::Matrix3d> ldlt(a);
    if (ldlt.rcond() < 1e-14) throw FitError("conditioning variables are collinear");
    const Eigen::Vector3d beta = ldlt.solve(rhs);
    s->beta = {my + beta(0), beta(1), beta(2)};
    s->mean = {m1, m2};
    return s;
  }

  const Standardized2d st = standardize(x1, x2, y);
  double spread = 0;
  for (std::size_t j = 0; j < 2; ++j) {
    const std::vector<double> col(j == 0 ? st.z1 : st.z2);
    spread += 0.5 * robust_spread(col, st.sorted[j]);
  }
  const double h = cfg.bandwidth ? *cfg.bandwidth : 1.06 * spread * std::pow(static_cast<double>(n), -1.0 / 6.0);

  if (cfg.method == SmootherMethod::loess) {
    auto s = std::make_shared<Vertex2dHermite>();
    init_vertex_grid(*s, st, kVertices2d);
    const std::size_t nv = s->g1.size() * s->g2.size();
    s->f.resize(nv);
    s->fx.resize(nv);
    s->fy.resize(nv);
    s->fxy.resize(nv);
    const std::size_t q = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(cfg.span * static_cast<double>(n))),
                                                  cfg.degree == 2 ? 7 : 4, n);
    parallel_for(nv, [&](std::size_t b, std::size_t e) {
      std::vector<double> dist(n), scratch(n);
      for (std::size_t k = b; k < e; ++k) {
        const std::size_t i = k / s->g2.size();
        const std::size_t j = k % s->g2.size();
        s->f[k] = loess_local_2d(st, s->g1[i], s->g2[j], q, cfg.degree, dist, scratch);
      }
    });
    // Slopes from the vertex values rather than the local fits: local slope
    // estimates are noisier and make the surface ripple between vertices.
    grid_slopes(*s);
    return s;
  }

  // Kernel and moving average: exact estimates at the vertices.
  auto s = std::make_shared<Vertex2dBilinear>();
  init_vertex_grid(*s, st, 2 * kVertices2d);
  s->ymin = st.ymin;
  s->ymax = st.ymax;
  const std::size_t nv = s->g1.size() * s->g2.size();
  s->f.resize(nv);
  const bool kernel = cfg.method == SmootherMethod::kernel;
  parallel_for(nv, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const double v1 = s->g1[k / s->g2.size()];
      const double v2 = s->g2[k % s->g2.size()];
      double sw = 0, swy = 0, best = INFINITY, nearest = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double a = st.z1[i] - v1;
        const double c = st.z2[i] - v2;
        const double d2 = a * a + c * c;
        if (d2 < best) {
          best = d2;
          nearest = st.y[i];
        }
        double w;
        if (kernel) {
          w = std::exp(-0.5 * d2 / (h * h));
        } else {
          w = d2 <= h * h ? 1.0 : 0.0;
        }
        sw += w;
        swy += w * st.y[i];
      }
      s->f[k] = sw > 1e-300 ? swy / sw : nearest;
    }
  });
  return s;
}

void check_inputs(const std::vector<std::span<const double>>& x, std::span<const double> y,
                  const SmootherConfig& cfg) {
  cfg.validate();
  if (x.empty() || x.size() > 2) throw FitError("smoothing supports one or two conditioning variables");
  if (y.size() < kMinPoints) {
    throw FitError("smoothing needs at least " + std::to_string(kMinPoints) + " points, got " + std::to_string(y.size()));
  }
  for (const auto& c : x) {
    if (c.size() != y.size()) throw FitError("conditioning and response lengths differ");
    for (double v : c) {
      if (!std::isfinite(v)) throw FitError("non-finite conditioning value");
    }
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw FitError("non-finite response value");
  }
}

}  // namespace

Smoother Smoother::fit(const std::vector<std::span<const double>>& x, std::span<const double> y,
                       const SmootherConfig& cfg) {
  check_inputs(x, y, cfg);
  std::shared_ptr<Impl> impl = x.size() == 1 ? fit_1d(x[0], y, cfg) : fit_2d(x[0], x[1], y, cfg);
  impl->dim = x.size();
  impl->cfg = cfg;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto [mn, mx] = std::minmax_element(x[j].begin(), x[j].end());
    impl->lo[j] = *mn;
    impl->hi[j] = *mx;
  }
  return Smoother(std::move(impl));
}

Smoother Smoother::fit(std::span<const double> x, std::span<const double> y, const SmootherConfig& cfg) {
  return fit(std::vector<std::span<const double>>{x}, y, cfg);
}

Smoother Smoother::fit(std::span<const double> x1, std::span<const double> x2, std::span<const double> y,
                       const SmootherConfig& cfg) {
  return fit(std::vector<std::span<const double>>{x1, x2}, y, cfg);
}

std::size_t Smoother::dimension() const noexcept { return impl_->dim; }
const SmootherConfig& Smoother::config() const noexcept { return impl_->cfg; }

std::pair<double, double> Smoother::range(std::size_t axis) const {
  if (axis >= impl_->dim) throw DomainError("smoother axis out of range");
  return {impl_->lo[axis], impl_->hi[axis]};
}

double Smoother::predict(double x) const {
  if (impl_->dim != 1) throw DomainError("smoother expects 2 coordinates, got 1");
  return impl_->predict(&x);
}

double Smoother::predict(double x1, double x2) const {
  if (impl_->dim != 2) throw DomainError("smoother expects 1 coordinate, got 2");
  const std::array<double, 2> p{x1, x2};
  return impl_->predict(p.data());
}

double Smoother::predict(std::span<const double> point) const {
  if (point.size() != impl_->dim) {
    throw DomainError("smoother expects " + std::to_string(impl_->dim) + " coordinates, got " +
                      std::to_string(point.size()));
  }
  return impl_->predict(point.data());
}

std::vector<double> Smoother::predict_batch(std::span<const double> x) const {
  if (impl_->dim != 1) throw DomainError("smoother expects 2 coordinates, got 1");
  std::vector<double> out(x.size());
  parallel_for(x.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = impl_->predict(&x[i]);
  });
  return out;
}

std::vector<double> Smoother::predict_batch(std::span<const double> x1, std::span<const double> x2) const {
  if (impl_->dim != 2) throw DomainError("smoother expects 1 coordinate, got 2");
  if (x1.size() != x2.size()) throw DomainError("coordinate arrays differ in length");
  std::vector<double> out(x1.size());
  parallel_for(x1.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const std::array<double, 2> p{x1[i], x2[i]};
      out[i] = impl_->predict(p.data());
    }
  });
  return out;
}

}  // namespace voi
