#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voi/config.hpp"
#include "voi/report.hpp"
#include "voi/sample_table.hpp"
#include "voi/voi_engine.hpp"

namespace voi {

struct RunResult {
  VoiReport report;
  nlohmann::json config_echo;
  std::vector<PlotSeries> plots;
  // Per-alternative cost and mean loss of the built-in discrete example.
  std::vector<double> costs;
  std::vector<double> expected_losses;
};

/// Runs the configured analysis. With samples, the problem's utilities are
/// read from (tabulated) or computed on (closed form) the given table instead
/// of sampling a built-in scenario.
RunResult run_analysis(const RunConfig& config, const SampleTable* samples = nullptr);

/// report.json and report.txt in out_dir (created if needed).
void write_reports(const RunResult& result, const std::string& out_dir);
/// One CSV per plot series in out_dir.
void write_plot_data(const RunResult& result, const std::string& out_dir);

/// Text tables in the layout of the reference results: expected results and
/// information values (discrete) or information values, prior optimum and
/// EVPM (continuous), with standard errors appended.
std::string render_tables(const RunResult& result);

/// 1 for configuration and schema errors, 2 for numerical failures.
int exit_code_for(const std::exception& e);

}  // namespace voi
