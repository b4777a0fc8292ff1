#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voi/continuous.hpp"
#include "voi/decision_model.hpp"
#include "voi/smoothing.hpp"
#include "voi/voi_engine.hpp"

namespace voi {

inline constexpr const char* kScenarioDiscrete = "working-example-discrete";
inline constexpr const char* kScenarioContinuous = "working-example-continuous";

struct SampleInformationRequest {
  std::string factor;
  std::vector<std::size_t> n_s;
};

/// Parsed and validated run configuration.
///
/// JSON layout:
///   problem:  {"scenario": name} or inline {"factors": [...], "decisions":
///             {"labels": [...]} | {"lower": x, "upper": y}, "utility":
///             {"kind": "tabulated" | "quadratic" | "linex", "c", "gamma",
///             "outcome"}}
///   analysis: {"factors": "all" | [names], "groups": [[a, b], ...],
///             "estimator", "smoother": {"method", "span", "bandwidth",
///             "degree"}, "n_samples", "seed", "threads", "normalizer",
///             "sample_information": [{"factor", "n_s": [...]}],
///             "full_model", "knots", "mode", "plot_data"}
struct RunConfig {
  std::optional<std::string> scenario;
  Problem problem;
  std::map<std::string, std::string> units;
  std::optional<std::vector<std::string>> factors;  // unset: all
  std::vector<std::vector<std::string>> groups;
  EvppiEstimator estimator = EvppiEstimator::reoptimize;
  std::optional<SmootherConfig> smoother;  // unset: per-analysis defaults
  std::size_t n_samples = 100000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  Normalizer normalizer = Normalizer::evpm;
  std::vector<SampleInformationRequest> sample_information;
  bool full_model = true;
  std::size_t knots = 50;
  std::optional<ContinuousMode> mode;
  bool plot_data = false;
};

/// Throws ConfigError with the offending key path in the message.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
RunConfig scenario_config(const std::string& scenario);

/// Effective configuration as JSON; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

nlohmann::json to_json(const DistributionSpec& d);
DistributionSpec distribution_from_json(const nlohmann::json& j);

/// Expands the factor selection and groups against the available names.
std::vector<std::vector<std::string>> analysis_groups(const RunConfig& c, const std::vector<std::string>& available);

}  // namespace voi
