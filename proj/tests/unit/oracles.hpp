#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the estimators under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "voi/sample_table.hpp"

namespace oracle {

/// Finite discrete problem: independent factors with listed levels and
/// probabilities, and a utility per joint level combination and decision.
struct DiscreteProblem {
  std::vector<std::vector<double>> levels;  // per factor
  std::vector<std::vector<double>> probs;   // per factor
  std::size_t decisions = 2;
  // utility[combo * decisions + a], combo in mixed-radix order (factor 0 fastest)
  std::vector<double> utility;

  std::size_t combos() const {
    std::size_t c = 1;
    for (const auto& l : levels) c *= l.size();
    return c;
  }
  std::vector<std::size_t> digits(std::size_t combo) const {
    std::vector<std::size_t> d(levels.size());
    for (std::size_t f = 0; f < levels.size(); ++f) {
      d[f] = combo % levels[f].size();
      combo /= levels[f].size();
    }
    return d;
  }
  double prob(std::size_t combo) const {
    const auto d = digits(combo);
    double p = 1;
    for (std::size_t f = 0; f < d.size(); ++f) p *= probs[f][d[f]];
    return p;
  }
  double u(std::size_t combo, std::size_t a) const { return utility[combo * decisions + a]; }
};

inline std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct Exact {
  std::size_t a_opt;
  double evpi;
  std::vector<double> v;   // per factor
  std::vector<double> dc;  // per factor
};

/// Exhaustive enumeration of the joint distribution.
inline Exact enumerate(const DiscreteProblem& p) {
  const std::size_t nc = p.combos();
  const std::size_t na = p.decisions;
  std::vector<double> eu(na, 0.0);
  double e_max = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    double best = -INFINITY;
    for (std::size_t a = 0; a < na; ++a) {
      eu[a] += p.prob(c) * p.u(c, a);
      best = std::max(best, p.u(c, a));
    }
    e_max += p.prob(c) * best;
  }
  Exact r;
  r.a_opt = argmax_first(eu);
  r.evpi = e_max - eu[r.a_opt];
  for (std::size_t f = 0; f < p.levels.size(); ++f) {
    double v = 0, dc = 0;
    for (std::size_t l = 0; l < p.levels[f].size(); ++l) {
      std::vector<double> cond(na, 0.0);
      for (std::size_t c = 0; c < nc; ++c) {
        if (p.digits(c)[f] != l) continue;
        for (std::size_t a = 0; a < na; ++a) cond[a] += p.prob(c) / p.probs[f][l] * p.u(c, a);
      }
      std::size_t best = r.a_opt;
      for (std::size_t a = 0; a < na; ++a) {
        if (cond[a] > cond[best]) best = a;
      }
      v += p.probs[f][l] * (cond[best] - cond[r.a_opt]);
      if (best != r.a_opt) dc += p.probs[f][l];
    }
    r.v.push_back(v);
    r.dc.push_back(dc);
  }
  return r;
}

/// Smallest gap between the best and second-best expected utility, taken
/// over the prior and every single-factor conditional.
inline double decision_margin(const DiscreteProblem& p) {
  auto gap = [](std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    return v[0] - v[1];
  };
  const std::size_t nc = p.combos();
  std::vector<double> eu(p.decisions, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t a = 0; a < p.decisions; ++a) eu[a] += p.prob(c) * p.u(c, a);
  }
  double m = gap(eu);
  for (std::size_t f = 0; f < p.levels.size(); ++f) {
    for (std::size_t l = 0; l < p.levels[f].size(); ++l) {
      std::vector<double> cond(p.decisions, 0.0);
      for (std::size_t c = 0; c < nc; ++c) {
        if (p.digits(c)[f] != l) continue;
        for (std::size_t a = 0; a < p.decisions; ++a) cond[a] += p.prob(c) / p.probs[f][l] * p.u(c, a);
      }
      m = std::min(m, gap(cond));
    }
  }
  return m;
}

/// Random problem with up to 3 factors, 4 levels and 4 decisions. Utilities
/// are redrawn until every prior and conditional optimum is separated from the
/// runner-up by at least min_margin, since decision-change counts jump at
/// ties that Monte Carlo cannot resolve.
inline DiscreteProblem random_problem(std::uint32_t seed, double min_margin = 0.25) {
  std::mt19937_64 g(seed);
  std::uniform_int_distribution<int> nf(1, 3), nl(2, 4), nd(2, 4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DiscreteProblem p;
  const int factors = nf(g);
  p.decisions = static_cast<std::size_t>(nd(g));
  for (int f = 0; f < factors; ++f) {
    const int l = nl(g);
    std::vector<double> lev(static_cast<std::size_t>(l)), pr(static_cast<std::size_t>(l));
    double s = 0;
    for (int i = 0; i < l; ++i) {
      lev[static_cast<std::size_t>(i)] = i;
      pr[static_cast<std::size_t>(i)] = 0.2 + unif(g);
      s += pr[static_cast<std::size_t>(i)];
    }
    for (auto& v : pr) v /= s;
    p.levels.push_back(lev);
    p.probs.push_back(pr);
  }
  p.utility.resize(p.combos() * p.decisions);
  do {
    for (auto& u : p.utility) u = 10.0 * unif(g);
  } while (decision_margin(p) < min_margin);
  return p;
}

/// Monte Carlo sample table of a finite problem: factor columns x1.., and
/// u_a<k> columns.
inline voi::SampleTable sample_problem(const DiscreteProblem& p, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<std::vector<double>> x(p.levels.size(), std::vector<double>(n));
  std::vector<std::vector<double>> u(p.decisions, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t combo = 0, radix = 1;
    for (std::size_t f = 0; f < p.levels.size(); ++f) {
      std::discrete_distribution<std::size_t> d(p.probs[f].begin(), p.probs[f].end());
      const std::size_t l = d(g);
      x[f][k] = p.levels[f][l];
      combo += l * radix;
      radix *= p.levels[f].size();
    }
    for (std::size_t a = 0; a < p.decisions; ++a) u[a][k] = p.u(combo, a);
  }
  voi::SampleTable t;
  for (std::size_t f = 0; f < x.size(); ++f) t.add_column("x" + std::to_string(f + 1), x[f]);
  for (std::size_t a = 0; a < u.size(); ++a) t.add_column(voi::utility_column(a), u[a]);
  return t;
}

/// Crude Monte Carlo of c_f E[(S - r)^+], S ~ Gumbel(m, 1). Returns mean and
/// standard error.
inline std::pair<double, double> exceedance_mc(double m, double r, double c_f, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double uu = unif(g);
    while (uu <= 0.0) uu = unif(g);
    const double s = m - std::log(-std::log(uu));
    const double l = c_f * std::max(s - r, 0.0);
    s1 += l;
    s2 += l * l;
  }
  const double mean = s1 / static_cast<double>(n);
  const double var = s2 / static_cast<double>(n) - mean * mean;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

/// Composite Simpson rule on [a, b] with an even number of panels.
template <class F>
double simpson(F f, double a, double b, std::size_t panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Exhaustive grid maximizer for 1-d reference optima.
template <class F>
double grid_argmax(F f, double lo, double hi, std::size_t points) {
  double best = lo, fb = -INFINITY;
  for (std::size_t i = 0; i <= points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points);
    const double v = f(x);
    if (v > fb) {
      fb = v;
      best = x;
    }
  }
  return best;
}

/// Failure samples by rejection: pairs (X1, X2) of independent standard
/// normals kept when fails(x1, x2) holds, until n are kept. Columns X1, X2
/// and a constant "decision" column.
template <class Pred>
voi::SampleTable rejection_samples(Pred fails, std::size_t n, double decision, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z;
  std::vector<double> a, b;
  while (a.size() < n) {
    const double x1 = z(g), x2 = z(g);
    if (fails(x1, x2)) {
      a.push_back(x1);
      b.push_back(x2);
    }
  }
  voi::SampleTable t;
  t.add_column("X1", std::move(a));
  t.add_column("X2", std::move(b));
  t.add_column("decision", std::vector<double>(n, decision));
  return t;
}

/// Rows of a followed by rows of b; both must have the same columns.
inline voi::SampleTable stack_rows(const voi::SampleTable& a, const voi::SampleTable& b) {
  voi::SampleTable t;
  for (const auto& name : a.names()) {
    std::vector<double> v(a.column(name).begin(), a.column(name).end());
    v.insert(v.end(), b.column(name).begin(), b.column(name).end());
    t.add_column(name, std::move(v));
  }
  return t;
}

/// Gauss-Hermite rule for the standard normal (Golub-Welsch); weights sum to 1.
inline std::pair<std::vector<double>, std::vector<double>> normal_rule(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k - 1, k) = j(k, k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  std::vector<double> x(n), w(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    w[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
  return {x, w};
}

/// E[(S - r)^+] for S ~ Gumbel(m, 1): Ein(e^{-(r - m)}) = E1(x) + ln x + gamma.
inline double gumbel_excess(double m, double r) {
  const double x = std::exp(-(r - m));
  if (x < 1e-8) return x - 0.25 * x * x;
  return -std::expint(-x) + std::log(x) + 0.57721566490153286;
}

/// Golden-section maximizer after a coarse scan.
template <class F>
double golden_argmax(F f, double lo, double hi, std::size_t scan = 400) {
  const double step = (hi - lo) / static_cast<double>(scan);
  double a = grid_argmax(f, lo, hi, scan);
  double l = std::max(lo, a - step), r = std::min(hi, a + step);
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = r - g * (r - l), d = l + g * (r - l);
  double fc = f(c), fd = f(d);
  while (r - l > 1e-9) {
    if (fc > fd) {
      r = d;
      d = c;
      fd = fc;
      c = r - g * (r - l);
      fc = f(c);
    } else {
      l = c;
      c = d;
      fc = fd;
      d = l + g * (r - l);
      fd = f(d);
    }
  }
  return 0.5 * (l + r);
}

struct ContinuousExampleExact {
  double a_opt, cost, v_m, v_xr, v_cf;
  double sobol_m, sobol_xr, sobol_cf;  // of u(x, a_opt)
};

/// Continuous example by product quadrature: M ~ N(7.5, 1), X_R ~ LN(1, 0.1),
/// C_F ~ LN(3e7, 1e7), u = -C_F E[(S - a X_R)^+] - (1e6 a + 3e6). The
/// utility is linear in C_F, so conditioning on M or X_R uses E[C_F].
inline ContinuousExampleExact continuous_example_exact(int nodes = 60) {
  const auto [z, w] = normal_rule(nodes);
  auto lognormal_nodes = [&](double mean, double sd) {
    const double s2 = std::log1p((sd / mean) * (sd / mean));
    std::vector<double> v(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) v[k] = std::exp(std::log(mean) - 0.5 * s2 + std::sqrt(s2) * z[k]);
    return v;
  };
  std::vector<double> m(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) m[k] = 7.5 + z[k];
  const auto xr = lognormal_nodes(1.0, 0.1);
  const auto cf = lognormal_nodes(3e7, 1e7);
  auto cost = [](double a) { return 1e6 * a + 3e6; };
  auto loss_m = [&](double mm, double a) {
    double s = 0;
    for (std::size_t j = 0; j < xr.size(); ++j) s += w[j] * gumbel_excess(mm, a * xr[j]);
    return s;
  };
  auto loss_xr = [&](double x, double a) {
    double s = 0;
    for (std::size_t i = 0; i < m.size(); ++i) s += w[i] * gumbel_excess(m[i], a * x);
    return s;
  };
  auto loss = [&](double a) {
    double s = 0;
    for (std::size_t i = 0; i < m.size(); ++i) s += w[i] * loss_m(m[i], a);
    return s;
  };
  const double lo = 4, hi = 20;
  ContinuousExampleExact r{};
  r.a_opt = golden_argmax([&](double a) { return -3e7 * loss(a) - cost(a); }, lo, hi);
  r.cost = 3e7 * loss(r.a_opt) + cost(r.a_opt);
  const double l0 = loss(r.a_opt);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double c = cf[k];
    const double a = golden_argmax([&](double v) { return -c * loss(v) - cost(v); }, lo, hi, 40);
    r.v_cf += w[k] * ((-c * loss(a) - cost(a)) - (-c * l0 - cost(r.a_opt)));
    const double am = golden_argmax([&](double v) { return -3e7 * loss_m(m[k], v) - cost(v); }, lo, hi);
    r.v_m += w[k] * ((-3e7 * loss_m(m[k], am) - cost(am)) - (-3e7 * loss_m(m[k], r.a_opt) - cost(r.a_opt)));
    const double ax = golden_argmax([&](double v) { return -3e7 * loss_xr(xr[k], v) - cost(v); }, lo, hi);
    r.v_xr += w[k] * ((-3e7 * loss_xr(xr[k], ax) - cost(ax)) - (-3e7 * loss_xr(xr[k], r.a_opt) - cost(r.a_opt)));
  }
  // First-order variances of -C_F g(M, X_R); C_F is independent of g.
  const double ec = 3e7, vc = 1e14;
  double eg2 = 0, em2 = 0, ex2 = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double gm = loss_m(m[i], r.a_opt), gx = loss_xr(xr[i], r.a_opt);
    em2 += w[i] * gm * gm;
    ex2 += w[i] * gx * gx;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double g = gumbel_excess(m[i], r.a_opt * xr[j]);
      eg2 += w[i] * w[j] * g * g;
    }
  }
  const double total = (vc + ec * ec) * eg2 - ec * ec * l0 * l0;
  r.sobol_m = ec * ec * (em2 - l0 * l0) / total;
  r.sobol_xr = ec * ec * (ex2 - l0 * l0) / total;
  r.sobol_cf = vc * l0 * l0 / total;
  return r;
}

}  // namespace oracle
