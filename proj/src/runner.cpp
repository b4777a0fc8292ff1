#include "voi/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "voi/continuous.hpp"
#include "voi/decision_model.hpp"
#include "voi/errors.hpp"
#include "voi/parallel.hpp"

namespace voi {

namespace {

constexpr std::size_t kProfilePoints = 101;
constexpr std::size_t kScatterPoints = 2000;

std::string unit_of(const RunConfig& c, const std::string& name) {
  const auto it = c.units.find(name);
  return it == c.units.end() ? "-" : it->second;
}

std::string utility_unit(const RunConfig& c) { return c.scenario ? "EUR" : "utility"; }

double quantile_of(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

std::vector<double> profile_grid(std::span<const double> x, std::size_t points) {
  std::vector<double> v(x.begin(), x.end());
  const double lo = quantile_of(v, 0.005);
  const double hi = quantile_of(v, 0.995);
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return g;
}

std::vector<std::string> factor_columns(const SampleTable& t) {
  std::vector<std::string> out;
  for (const auto& n : t.names()) {
    const bool utility = n.rfind("u_a", 0) == 0;
    const bool outcome = n == "y" || n.rfind("y_a", 0) == 0;
    if (!utility && !outcome && n != "decision") out.push_back(n);
  }
  return out;
}

void discrete_plots(const RunConfig& c, const SampleTable& table, const VoiReport& r, const SmootherConfig& sc,
                    std::vector<PlotSeries>& plots) {
  const std::size_t na = table.decision_count();
  for (const auto& f : r.factors) {
    if (f.factors.size() != 1) continue;
    const std::string& name = f.factors[0];
    const auto x = table.column(name);
    const CvppiProfile prof = cvppi_profile(table, name, sc, r.a_opt_index);
    const auto smoothers = fit_decision_smoothers(table, {x}, sc);
    PlotSeries s;
    s.name = "cvppi_" + name;
    s.columns.push_back(name);
    s.units.push_back(unit_of(c, name));
    const auto grid = profile_grid(x, kProfilePoints);
    s.data.push_back(grid);
    for (std::size_t a = 0; a < na; ++a) {
      s.columns.push_back("S_a" + std::to_string(a + 1));
      s.units.push_back(utility_unit(c));
      s.data.push_back(smoothers[a].predict_batch(grid));
    }
    s.columns.push_back("cvppi");
    s.units.push_back(utility_unit(c));
    std::vector<double> cv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) cv[i] = prof(grid[i]);
    s.data.push_back(std::move(cv));
    plots.push_back(std::move(s));

    PlotSeries sc_series;
    sc_series.name = "scatter_" + name;
    sc_series.columns.push_back(name);
    sc_series.units.push_back(unit_of(c, name));
    const std::size_t n = table.rows();
    const std::size_t m = std::min(n, kScatterPoints);
    std::vector<std::size_t> rows(m);
    for (std::size_t i = 0; i < m; ++i) rows[i] = i * n / m;
    std::vector<double> xs(m);
    for (std::size_t i = 0; i < m; ++i) xs[i] = x[rows[i]];
    sc_series.data.push_back(xs);
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<double> u(m), s_fit(m);
      for (std::size_t i = 0; i < m; ++i) u[i] = table.utility(a)[rows[i]];
      s_fit = smoothers[a].predict_batch(xs);
      sc_series.columns.push_back("u_a" + std::to_string(a + 1));
      sc_series.units.push_back(utility_unit(c));
      sc_series.data.push_back(std::move(u));
      sc_series.columns.push_back("S_a" + std::to_string(a + 1));
      sc_series.units.push_back(utility_unit(c));
      sc_series.data.push_back(std::move(s_fit));
    }
    plots.push_back(std::move(sc_series));
  }
}

void sample_information_plots(const RunConfig& c, const VoiReport& r, std::vector<PlotSeries>& plots) {
  for (const auto& req : c.sample_information) {
    PlotSeries s;
    s.name = "sample_information_" + req.factor;
    s.columns = {"n_s", "V_Z", "V_Z_se"};
    s.units = {"count", utility_unit(c), utility_unit(c)};
    s.data.assign(3, {});
    for (const auto& p : r.sample_information) {
      if (p.factor != req.factor) continue;
      s.data[0].push_back(static_cast<double>(p.n_s));
      s.data[1].push_back(p.v.value);
      s.data[2].push_back(p.v.se);
    }
    plots.push_back(std::move(s));
  }
}

void continuous_plots(const RunConfig& c, const ContinuousSamples& cs, const std::vector<OptimalDecisionMap>& maps,
                      std::vector<PlotSeries>& plots) {
  for (const auto& map : maps) {
    PlotSeries s;
    s.name = "optimum_map_" + map.factor();
    s.columns = {map.factor(), "a_opt"};
    s.units = {unit_of(c, map.factor()), unit_of(c, "a")};
    s.data = {map.knots(), map.optima()};
    plots.push_back(std::move(s));

    PlotSeries p;
    p.name = "profile_" + map.factor();
    p.columns = {map.factor(), "a", "S"};
    p.units = {unit_of(c, map.factor()), unit_of(c, "a"), utility_unit(c)};
    p.data.assign(3, {});
    const auto xg = profile_grid(cs.table.column(map.factor()), 21);
    for (double x : xg) {
      for (std::size_t j = 0; j < 41; ++j) {
        const double a = map.a_min() + (map.a_max() - map.a_min()) * static_cast<double>(j) / 40.0;
        p.data[0].push_back(x);
        p.data[1].push_back(a);
        p.data[2].push_back(map.profile(x, a));
      }
    }
    plots.push_back(std::move(p));
  }
}

FactorResult full_model_factor(const SampleTable& full, const std::string& name, const EvppiOptions& eo,
                               const IndexEstimate& norm, std::size_t a_opt) {
  FactorResult f;
  f.name = name;
  f.factors = {name};
  const ConditionalAnalysis ca = analyze_conditioning(full, {full.column(name)}, eo, a_opt);
  f.v = ca.v;
  f.v_other = ca.v_other;
  f.dc = ca.dc;
  f.relative_v = relative_iv(f.v.value, norm);
  f.sobol = sobol_first_order(full, name, full.utility(a_opt), eo.smoother);
  return f;
}

RunResult run_discrete(const RunConfig& c, const SampleTable& table, const std::vector<std::string>& available,
                       const SampleTable* full, const RandomSource& root) {
  RunResult out;
  DiscreteAnalysisOptions o;
  o.groups = analysis_groups(c, available);
  o.evppi.estimator = c.estimator;
  if (c.smoother) o.evppi.smoother = *c.smoother;
  o.normalizer = c.normalizer;
  out.report = analyze_discrete(table, o);
  VoiReport& r = out.report;

  if (full) {
    r.evpi_full_model = evpi(*full);
    for (const auto& name : c.problem.aleatory_names()) {
      if (full->has(name)) r.full_model_factors.push_back(full_model_factor(*full, name, o.evppi, *r.evpi_full_model, r.a_opt_index));
    }
  }
  for (std::size_t i = 0; i < c.sample_information.size(); ++i) {
    const auto& req = c.sample_information[i];
    if (!(c.scenario && *c.scenario == kScenarioDiscrete && req.factor == "M")) {
      throw ConfigError("analysis.sample_information: a data model is available only for the load location M of " +
                        std::string(kScenarioDiscrete));
    }
    const RandomSource stream = root.split(1000 + i);
    for (std::size_t ns : req.n_s) {
      r.sample_information.push_back(
          {req.factor, ns, sample_information_value(table, req.factor, ns, gumbel_location_statistic(1.0), stream, o.evppi)});
    }
  }
  if (c.plot_data) {
    discrete_plots(c, table, r, o.evppi.smoother, out.plots);
    sample_information_plots(c, r, out.plots);
  }
  return out;
}

RunResult run_continuous(const RunConfig& c, const ContinuousSamples& cs, const std::vector<std::string>& available,
                         const ContinuousSamples* full, const RandomSource& root) {
  if (!c.sample_information.empty()) {
    throw ConfigError("analysis.sample_information: supported for discrete decisions only");
  }
  RunResult out;
  ContinuousAnalysisOptions o;
  o.groups = analysis_groups(c, available);
  o.normalizer = c.normalizer;
  o.voi.estimator = c.estimator;
  o.voi.optimum.knots = c.knots;
  if (c.smoother) {
    o.voi.optimum.smoother = *c.smoother;
    o.voi.closed_form_smoother = *c.smoother;
  }
  if (c.mode) {
    o.voi.mode = *c.mode;
  } else if (cs.closed_form) {
    o.voi.mode = cs.closed_form->kind == ClosedFormKind::quadratic ? ContinuousMode::closed_form_quadratic
                                                                    : ContinuousMode::closed_form_linex;
  }
  ContinuousAnalysis ca = analyze_continuous(cs, o, root.split(3));
  out.report = std::move(ca.report);
  if (full) {
    const ContinuousPerfectInfo pi = evpi_continuous(*full, out.report.a_opt);
    out.report.evpi_full_model = pi.value;
    if (pi.excluded > 0) out.report.extra["full_model_excluded_samples"] = static_cast<double>(pi.excluded);
  }
  if (c.plot_data) continuous_plots(c, cs, ca.maps, out.plots);
  return out;
}

}  // namespace

RunResult run_analysis(const RunConfig& c, const SampleTable* samples) {
  set_thread_count(c.threads);
  const RandomSource root(c.seed);
  const Problem& p = c.problem;
  RunResult out;

  if (!samples) {
    if (!c.scenario) throw ConfigError("problem: inline problems need a samples file (use ingest-run)");
    const SampleTable eps = sample_epistemic(p, c.n_samples, root.split(1));
    if (p.decisions.is_discrete()) {
      const SampleTable table = evaluate_utilities(p, eps, root.split(2), false);
      std::optional<SampleTable> full;
      if (c.full_model) full = evaluate_utilities(p, eps, root.split(2), true);
      out = run_discrete(c, table, p.epistemic_names(), full ? &*full : nullptr, root);
      const auto& we = std::get<DiscreteWorkingExample>(p.utility);
      out.costs = we.costs;
      for (std::size_t a = 0; a < table.decision_count(); ++a) {
        const auto y = table.column("y_a" + std::to_string(a + 1));
        out.expected_losses.push_back(std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size()));
      }
    } else {
      const ContinuousSamples cs = evaluate_continuous_utilities(p, eps, root.split(2), false);
      std::optional<ContinuousSamples> full;
      if (c.full_model) full = evaluate_continuous_utilities(p, eps, root.split(2), true);
      out = run_continuous(c, cs, p.epistemic_names(), full ? &*full : nullptr, root);
    }
  } else {
    std::vector<std::string> available;
    if (p.factors.empty()) {
      available = factor_columns(*samples);
    } else {
      for (const auto& f : p.factors) {
        if (!samples->has(f.name)) throw SchemaError("samples: missing factor column '" + f.name + "'");
        if (f.cls == FactorClass::epistemic) available.push_back(f.name);
      }
    }
    if (p.decisions.is_discrete()) {
      if (!std::holds_alternative<TabulatedUtility>(p.utility)) {
        throw ConfigError("problem.utility: discrete decisions read tabulated utilities from the samples");
      }
      const SampleTable table = evaluate_utilities(p, *samples, root.split(2), false);
      if (table.decision_count() != p.decisions.size()) {
        throw SchemaError("samples: expected " + std::to_string(p.decisions.size()) + " utility columns u_a1..u_a" +
                          std::to_string(p.decisions.size()) + ", found " + std::to_string(table.decision_count()));
      }
      out = run_discrete(c, table, available, nullptr, root);
    } else {
      const ContinuousSamples cs = evaluate_continuous_utilities(p, *samples, root.split(2), false);
      out = run_continuous(c, cs, available, nullptr, root);
    }
    out.report.extra["ingested_rows"] = static_cast<double>(samples->rows());
  }
  out.report.seed = c.seed;
  out.config_echo = to_json(c);
  return out;
}

void write_reports(const RunResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string dir = std::filesystem::path(out_dir).string();
  write_file_atomic(dir + "/report.json", to_json(result.report, result.config_echo).dump(2) + "\n");
  write_file_atomic(dir + "/report.txt", render_text(result.report));
}

void write_plot_data(const RunResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& s : result.plots) {
    std::ostringstream o;
    s.write_csv(o);
    write_file_atomic(out_dir + "/" + s.name + ".csv", o.str());
  }
}

std::string render_tables(const RunResult& result) {
  const VoiReport& r = result.report;
  std::ostringstream o;
  char buf[256];
  if (r.discrete && !result.costs.empty()) {
    o << "Expected results per alternative [1e6 EUR]\n";
    std::snprintf(buf, sizeof buf, "%-12s%14s%16s%22s\n", "Alternative", "Cost c_a", "Expected loss",
                  "-E[cost + loss]");
    o << buf;
    for (std::size_t a = 0; a < result.costs.size(); ++a) {
      std::snprintf(buf, sizeof buf, "%-12s%14.2f%16.3f%22.3f\n", ("a" + std::to_string(a + 1)).c_str(),
                    result.costs[a] / 1e6, result.expected_losses[a] / 1e6, r.expected_utilities[a] / 1e6);
      o << buf;
    }
    o << "prior optimum: a" << r.a_opt_index + 1 << "\n\n";
  }
  if (!r.discrete) {
    std::snprintf(buf, sizeof buf, "prior optimum a_opt = %.3f, expected cost + damage = %.3f [1e6 EUR]\n", r.a_opt,
                  -r.prior_expected_utility / 1e6);
    o << buf;
  }
  if (r.evpm) {
    std::snprintf(buf, sizeof buf, "EVPM = %.3f (SE %.3f) [1e6 EUR]\n", r.evpm->value / 1e6, r.evpm->se / 1e6);
    o << buf;
  }
  if (r.evpi_full_model) {
    std::snprintf(buf, sizeof buf, "EVPI (aleatory inputs included) = %.3f (SE %.3f) [1e6 EUR]\n",
                  r.evpi_full_model->value / 1e6, r.evpi_full_model->se / 1e6);
    o << buf;
  }
  o << "\nInformation values\n";
  if (r.discrete) {
    std::snprintf(buf, sizeof buf, "%-8s%14s%12s%16s%10s%10s\n", "Factor", "V [1e3 EUR]", "SE [1e3]", "Relative V",
                  "DC", "SE(DC)");
  } else {
    std::snprintf(buf, sizeof buf, "%-8s%14s%12s%16s%10s%10s\n", "Factor", "V [1e3 EUR]", "SE [1e3]", "Relative V",
                  "Sobol'", "SE");
  }
  o << buf;
  auto row = [&](const FactorResult& f) {
    const std::string rel = f.relative_v ? format_scaled(100 * *f.relative_v, 1, 1) + "%" : "n/a";
    if (r.discrete) {
      std::snprintf(buf, sizeof buf, "%-8s%14.1f%12.1f%16s%10.3f%10.3f\n", f.name.c_str(), f.v.value / 1e3,
                    f.v.se / 1e3, rel.c_str(), f.dc ? f.dc->value : 0.0, f.dc ? f.dc->se : 0.0);
    } else {
      std::snprintf(buf, sizeof buf, "%-8s%14.1f%12.1f%16s%9.1f%%%9.1f%%\n", f.name.c_str(), f.v.value / 1e3,
                    f.v.se / 1e3, rel.c_str(), 100 * f.sobol.value, 100 * f.sobol.se);
    }
    o << buf;
  };
  for (const auto& f : r.factors) row(f);
  for (const auto& f : r.full_model_factors) row(f);
  for (const auto& w : r.warnings) o << "warning: " << w << "\n";
  return o.str();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SchemaError*>(&e)) return 1;
  return 2;
}

}  // namespace voi
