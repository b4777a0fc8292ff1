#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "voi/voi_engine.hpp"

namespace voi {

/// report.json content; config_echo is embedded verbatim.
nlohmann::json to_json(const VoiReport& report, const nlohmann::json& config_echo);

/// Aligned plain-text summary: prior decision, normalizers and one row per
/// factor (V, SE, relative V, DC, first-order Sobol').
std::string render_text(const VoiReport& report);

/// One plot-data file: column names, a units row and column-major data.
struct PlotSeries {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<double>> data;

  void write_csv(std::ostream& out) const;
};

/// Writes to path + ".tmp" and renames over path.
void write_file_atomic(const std::string& path, const std::string& content);

/// Fixed-point value with thousands scaling, e.g. 336.4e3 -> "336.4" for
/// scale 1e3.
std::string format_scaled(double v, double scale, int decimals);

}  // namespace voi
