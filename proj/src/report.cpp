#include "voi/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "voi/errors.hpp"

namespace voi {

using nlohmann::json;

namespace {

json number_or_null(double v, bool defined = true) {
  if (!defined || !std::isfinite(v)) return nullptr;
  return v;
}

json factor_json(const FactorResult& f, EvppiEstimator estimator) {
  json j;
  j["name"] = f.name;
  j["factors"] = f.factors;
  j["V"] = number_or_null(f.v.value, f.v.defined);
  j["V_raw"] = number_or_null(f.v.raw, f.v.defined);
  j["V_se"] = number_or_null(f.v.se, f.v.defined);
  j["relative_V"] = f.relative_v ? json(*f.relative_v) : json(nullptr);
  j["DC"] = f.dc ? number_or_null(f.dc->value) : json(nullptr);
  j["DC_se"] = f.dc ? number_or_null(f.dc->se) : json(nullptr);
  j["sobol_first"] = number_or_null(f.sobol.value, f.sobol.defined);
  j["sobol_first_raw"] = number_or_null(f.sobol.raw, f.sobol.defined);
  j["sobol_se"] = number_or_null(f.sobol.se, f.sobol.defined);
  const EvppiEstimator other = estimator == EvppiEstimator::plugin ? EvppiEstimator::reoptimize : EvppiEstimator::plugin;
  j["V_" + std::string(to_string(other))] = number_or_null(f.v_other.raw, f.v_other.defined);
  return j;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }
std::string pad_right(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

std::string with_se(const IndexEstimate& e, double scale, int decimals) {
  return format_scaled(e.value, scale, decimals) + " (SE " + format_scaled(e.se, scale, decimals) + ")";
}

}  // namespace

std::string format_scaled(double v, double scale, int decimals) { return fixed(v / scale, decimals); }

json to_json(const VoiReport& r, const json& config_echo) {
  json j;
  j["factors"] = json::array();
  for (const auto& f : r.factors) j["factors"].push_back(factor_json(f, r.estimator));
  j["decision_space"] = r.discrete ? "discrete" : "continuous";
  if (r.discrete) {
    j["a_opt"] = r.a_opt_index + 1;
    j["decision_labels"] = r.decision_labels;
    j["expected_utilities"] = r.expected_utilities;
  } else {
    j["a_opt"] = r.a_opt;
    j["expected_utilities"] = json::array({r.prior_expected_utility});
  }
  j["prior_expected_utility"] = r.prior_expected_utility;
  j["evpi"] = number_or_null(r.evpi.value);
  j["evpi_raw"] = number_or_null(r.evpi.raw);
  j["evpi_se"] = number_or_null(r.evpi.se);
  j["evpm"] = r.evpm ? number_or_null(r.evpm->value) : json(nullptr);
  j["evpm_se"] = r.evpm ? number_or_null(r.evpm->se) : json(nullptr);
  j["evpi_full_model"] = r.evpi_full_model ? number_or_null(r.evpi_full_model->value) : json(nullptr);
  j["evpi_full_model_se"] = r.evpi_full_model ? number_or_null(r.evpi_full_model->se) : json(nullptr);
  j["full_model_factors"] = json::array();
  for (const auto& f : r.full_model_factors) j["full_model_factors"].push_back(factor_json(f, r.estimator));
  j["sample_information"] = json::array();
  for (const auto& p : r.sample_information) {
    j["sample_information"].push_back(
        {{"factor", p.factor}, {"n_s", p.n_s}, {"V", p.v.value}, {"V_raw", p.v.raw}, {"V_se", p.v.se}});
  }
  json d;
  d["n"] = r.n;
  d["seed"] = r.seed;
  d["estimator"] = std::string(to_string(r.estimator));
  d["normalizer"] = std::string(to_string(r.normalizer));
  d["smoother"] = {{"method", std::string(to_string(r.smoother.method))},
                   {"span", r.smoother.span},
                   {"degree", r.smoother.degree},
                   {"bandwidth", r.smoother.bandwidth ? json(*r.smoother.bandwidth) : json(nullptr)}};
  d["warnings"] = r.warnings;
  for (const auto& [k, v] : r.extra) d[k] = v;
  j["diagnostics"] = d;
  j["config_echo"] = config_echo;
  return j;
}

std::string render_text(const VoiReport& r) {
  // Money-scale problems print in 1e6 / 1e3 units, anything else unscaled.
  double big = std::abs(r.prior_expected_utility);
  for (double u : r.expected_utilities) big = std::max(big, std::abs(u));
  const bool money = big >= 1e5;
  const double su = money ? 1e6 : 1.0, sv = money ? 1e3 : 1.0;
  const std::string lu = money ? " [1e6]" : "", lv = money ? " [1e3]" : "";

  std::ostringstream o;
  o << "samples: " << r.n << "   seed: " << r.seed << "   estimator: " << to_string(r.estimator)
    << "   smoother: " << to_string(r.smoother.method) << " (span " << fixed(r.smoother.span, 2) << ")\n";
  if (r.discrete) {
    o << "prior optimum: a" << r.a_opt_index + 1 << "\nexpected utilities" << lu << ":";
    for (std::size_t a = 0; a < r.expected_utilities.size(); ++a) {
      o << "  a" << a + 1 << " " << format_scaled(r.expected_utilities[a], su, 3);
    }
    o << "\n";
  } else {
    o << "prior optimum: a = " << fixed(r.a_opt, 3) << "   expected utility" << lu << ": "
      << format_scaled(r.prior_expected_utility, su, 3) << "\n";
  }
  if (r.evpm) o << "EVPM" << lu << ": " << with_se(*r.evpm, su, 3) << "\n";
  if (r.evpi_full_model) {
    o << "EVPI, full model" << lu << ": " << with_se(*r.evpi_full_model, su, 3) << "\n";
  } else {
    o << "EVPI" << lu << ": " << with_se(r.evpi, su, 3) << "\n";
  }
  o << "relative values normalized by " << (r.normalizer == Normalizer::evpm && r.evpm ? "EVPM" : "EVPI") << "\n\n";

  const std::vector<std::string> head{"Factor", "V" + lv, "SE" + lv, "Relative V", "DC", "Sobol'"};
  const std::vector<std::size_t> w{12, 12, 10, 12, 8, 8};
  auto row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) o << (i == 0 ? pad_right(cells[i], w[i]) : pad_left(cells[i], w[i]));
    o << "\n";
  };
  row(head);
  auto factor_row = [&](const FactorResult& f) {
    row({f.name, format_scaled(f.v.value, sv, money ? 1 : 4), format_scaled(f.v.se, sv, money ? 1 : 4),
         f.relative_v ? fixed(100 * *f.relative_v, 1) + "%" : "n/a", f.dc ? fixed(f.dc->value, 3) : "-",
         f.sobol.defined ? fixed(100 * f.sobol.value, 1) + "%" : "n/a"});
  };
  for (const auto& f : r.factors) factor_row(f);
  if (!r.full_model_factors.empty()) {
    o << "\nfull model (aleatory inputs realized):\n";
    for (const auto& f : r.full_model_factors) factor_row(f);
  }
  if (!r.sample_information.empty()) {
    o << "\nsample information value:\n";
    row({"Factor", "n_s", "V_Z" + lv, "SE" + lv});
    for (const auto& p : r.sample_information) {
      row({p.factor, std::to_string(p.n_s), format_scaled(p.v.value, sv, 1), format_scaled(p.v.se, sv, 1)});
    }
  }
  if (!r.warnings.empty()) {
    o << "\nwarnings:\n";
    for (const auto& s : r.warnings) o << "  " << s << "\n";
  }
  return o.str();
}

void PlotSeries::write_csv(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  };
  line(columns);
  line(units);
  const std::size_t rows = data.empty() ? 0 : data[0].size();
  char buf[32];
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t c = 0; c < data.size(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, data[c][k]);
      out << (c ? "," : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << "\n";
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp);
    f << content;
    if (!f) throw Error("failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace voi
