#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "voi/config.hpp"
#include "voi/errors.hpp"
#include "voi/runner.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string scenario;
  std::string samples;
  std::string out = "voi_out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<unsigned> threads;
  std::string estimator;
  std::string smoother;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_out) {
  cmd->add_option("--config", o.config, "run configuration (JSON)");
  cmd->add_option("--scenario", o.scenario, "built-in scenario: working-example-discrete | working-example-continuous");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("-n,--samples-count", o.n, "number of Monte Carlo samples");
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
  cmd->add_option("--estimator", o.estimator, "plugin | reoptimize");
  cmd->add_option("--smoother", o.smoother, "moving_average | linear | loess | kernel");
  if (with_out) cmd->add_option("--out", o.out, "output directory");
}

voi::RunConfig resolve(const Overrides& o) {
  voi::RunConfig c;
  if (!o.config.empty()) {
    c = voi::load_config(o.config);
  } else if (!o.scenario.empty()) {
    c = voi::scenario_config(o.scenario);
  } else {
    throw voi::ConfigError("either --config or --scenario is required");
  }
  if (!o.config.empty() && !o.scenario.empty()) throw voi::ConfigError("--config and --scenario are exclusive");
  if (o.seed) c.seed = *o.seed;
  if (o.n) {
    if (*o.n == 0) throw voi::ConfigError("--samples-count must be positive");
    c.n_samples = *o.n;
  }
  if (o.threads) c.threads = *o.threads;
  if (!o.estimator.empty()) c.estimator = voi::parse_evppi_estimator(o.estimator);
  if (!o.smoother.empty()) {
    voi::SmootherConfig s = c.smoother.value_or(voi::SmootherConfig{});
    s.method = voi::parse_smoother_method(o.smoother);
    c.smoother = s;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision sensitivity analysis: information values and variance-based indices"};
  app.require_subcommand(1);
  Overrides o;

  auto* run = app.add_subcommand("run", "sample a built-in scenario and write report.json / report.txt");
  add_common(run, o, true);
  auto* ingest = app.add_subcommand("ingest-run", "analyse an external sample file");
  add_common(ingest, o, true);
  ingest->add_option("--samples", o.samples, "CSV with factor and u_a<k> (or outcome) columns")->required();
  auto* tables = app.add_subcommand("tables", "print result tables of a built-in scenario");
  add_common(tables, o, false);
  auto* plot = app.add_subcommand("plot-data", "write plot-data CSV series");
  add_common(plot, o, true);
  plot->add_option("--samples", o.samples, "optional external sample file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string context = o.config.empty() ? (o.scenario.empty() ? "voi" : o.scenario) : o.config;
  try {
    voi::RunConfig c = resolve(o);
    std::optional<voi::SampleTable> samples;
    if (!o.samples.empty()) samples = voi::SampleTable::read_csv_file(o.samples);
    if (tables->parsed()) {
      if (!c.scenario) throw voi::ConfigError("tables needs a built-in scenario");
      c.plot_data = false;
      const voi::RunResult r = voi::run_analysis(c);
      std::cout << voi::render_tables(r);
      return 0;
    }
    if (plot->parsed()) {
      c.plot_data = true;
      const voi::RunResult r = voi::run_analysis(c, samples ? &*samples : nullptr);
      voi::write_plot_data(r, o.out);
      return 0;
    }
    const voi::RunResult r = voi::run_analysis(c, samples ? &*samples : nullptr);
    voi::write_reports(r, o.out);
    if (c.plot_data) voi::write_plot_data(r, o.out);
    std::cout << voi::render_text(r.report);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "voi: " << context << ": " << e.what() << "\n";
    return voi::exit_code_for(e);
  }
}
