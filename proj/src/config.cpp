#include "voi/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "voi/errors.hpp"

namespace voi {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) fail(path, "unknown key '" + k + "'");
  }
}

double get_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(path, "missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::uint64_t get_unsigned(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail(path, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::vector<std::string> get_names(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_string(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ConfigError(path + ": " + what);
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

DistributionSpec parse_distribution(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) fail(path, "expected an object with a 'kind'");
  const std::string kind = get_string(j.at("kind"), path + ".kind");
  return wrap(path, [&] {
    switch (parse_distribution_kind(kind)) {
      case DistributionKind::gumbel:
        check_keys(j, path, {"kind", "location", "scale"});
        return DistributionSpec::gumbel(get_number(j, "location", path),
                                        j.contains("scale") ? get_number(j, "scale", path) : 1.0);
      case DistributionKind::normal:
        check_keys(j, path, {"kind", "mean", "std"});
        return DistributionSpec::normal(get_number(j, "mean", path), get_number(j, "std", path));
      case DistributionKind::lognormal:
        check_keys(j, path, {"kind", "mean", "std"});
        return DistributionSpec::lognormal(get_number(j, "mean", path), get_number(j, "std", path));
      case DistributionKind::uniform:
        check_keys(j, path, {"kind", "lower", "upper"});
        return DistributionSpec::uniform(get_number(j, "lower", path), get_number(j, "upper", path));
    }
    fail(path, "unsupported distribution");
  });
}

void parse_problem(const json& j, RunConfig& c) {
  const std::string path = "problem";
  if (!j.is_object()) fail(path, "expected an object");
  if (j.contains("scenario")) {
    check_keys(j, path, {"scenario"});
    const std::string name = get_string(j.at("scenario"), path + ".scenario");
    const RunConfig s = scenario_config(name);
    c.scenario = s.scenario;
    c.problem = s.problem;
    c.units = s.units;
    return;
  }
  check_keys(j, path, {"factors", "decisions", "utility"});
  if (!j.contains("factors") || !j.at("factors").is_array()) fail(path + ".factors", "expected an array");
  Problem p;
  const json& fs = j.at("factors");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::string fp = path + ".factors[" + std::to_string(i) + "]";
    const json& f = fs[i];
    check_keys(f, fp, {"name", "distribution", "class", "unit"});
    if (!f.contains("name")) fail(fp, "missing 'name'");
    FactorSpec spec{get_string(f.at("name"), fp + ".name"), DistributionSpec::uniform(0, 1), FactorClass::epistemic};
    if (f.contains("distribution")) spec.dist = parse_distribution(f.at("distribution"), fp + ".distribution");
    if (f.contains("class")) {
      const std::string cls = get_string(f.at("class"), fp + ".class");
      if (cls == "aleatory") {
        spec.cls = FactorClass::aleatory;
      } else if (cls != "epistemic") {
        fail(fp + ".class", "expected 'aleatory' or 'epistemic'");
      }
    }
    if (f.contains("unit")) c.units[spec.name] = get_string(f.at("unit"), fp + ".unit");
    p.factors.push_back(std::move(spec));
  }
  if (j.contains("decisions")) {
    const json& d = j.at("decisions");
    const std::string dp = path + ".decisions";
    if (d.contains("labels")) {
      check_keys(d, dp, {"labels"});
      p.decisions = wrap(dp, [&] { return DecisionSpace::discrete(get_names(d.at("labels"), dp + ".labels")); });
    } else {
      check_keys(d, dp, {"lower", "upper"});
      p.decisions = wrap(dp, [&] { return DecisionSpace::continuous(get_number(d, "lower", dp), get_number(d, "upper", dp)); });
    }
  }
  if (j.contains("utility")) {
    const json& u = j.at("utility");
    const std::string up = path + ".utility";
    check_keys(u, up, {"kind", "c", "gamma", "outcome"});
    if (!u.contains("kind")) fail(up, "missing 'kind'");
    const std::string kind = get_string(u.at("kind"), up + ".kind");
    if (kind == "tabulated") {
      p.utility = TabulatedUtility{};
    } else if (kind == "quadratic" || kind == "linex") {
      ClosedFormUtility cf;
      cf.kind = kind == "quadratic" ? ClosedFormKind::quadratic : ClosedFormKind::linex;
      if (u.contains("c")) cf.c = get_number(u, "c", up);
      if (u.contains("gamma")) cf.gamma = get_number(u, "gamma", up);
      if (u.contains("outcome")) cf.outcome = get_string(u.at("outcome"), up + ".outcome");
      if (!(cf.c > 0)) fail(up + ".c", "must be positive");
      if (cf.kind == ClosedFormKind::linex && !(cf.gamma > 0)) fail(up + ".gamma", "must be positive");
      p.utility = cf;
    } else {
      fail(up + ".kind", "expected 'tabulated', 'quadratic' or 'linex'");
    }
  }
  wrap(path, [&] {
    validate(p);
    return 0;
  });
  c.problem = std::move(p);
}

void parse_analysis(const json& j, RunConfig& c) {
  const std::string path = "analysis";
  check_keys(j, path,
             {"factors", "groups", "estimator", "smoother", "n_samples", "seed", "threads", "normalizer",
              "sample_information", "full_model", "knots", "mode", "plot_data"});
  if (j.contains("factors")) {
    const json& f = j.at("factors");
    if (f.is_string()) {
      if (f.get<std::string>() != "all") fail(path + ".factors", "expected \"all\" or an array of names");
      c.factors.reset();
    } else {
      c.factors = get_names(f, path + ".factors");
    }
  }
  if (j.contains("groups")) {
    const json& g = j.at("groups");
    if (!g.is_array()) fail(path + ".groups", "expected an array of name arrays");
    c.groups.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string gp = path + ".groups[" + std::to_string(i) + "]";
      auto names = get_names(g[i], gp);
      if (names.empty() || names.size() > 2) fail(gp, "a group holds one or two factors");
      c.groups.push_back(std::move(names));
    }
  }
  if (j.contains("estimator")) {
    c.estimator = wrap(path + ".estimator", [&] { return parse_evppi_estimator(get_string(j.at("estimator"), path + ".estimator")); });
  }
  if (j.contains("smoother")) {
    const json& s = j.at("smoother");
    const std::string sp = path + ".smoother";
    check_keys(s, sp, {"method", "span", "bandwidth", "degree"});
    SmootherConfig sc;
    if (s.contains("method")) sc.method = wrap(sp + ".method", [&] { return parse_smoother_method(get_string(s.at("method"), sp + ".method")); });
    if (s.contains("span")) sc.span = get_number(s, "span", sp);
    if (s.contains("bandwidth") && !s.at("bandwidth").is_null()) sc.bandwidth = get_number(s, "bandwidth", sp);
    if (s.contains("degree")) sc.degree = static_cast<int>(get_unsigned(s.at("degree"), sp + ".degree"));
    wrap(sp, [&] {
      sc.validate();
      return 0;
    });
    c.smoother = sc;
  }
  if (j.contains("n_samples")) {
    c.n_samples = get_unsigned(j.at("n_samples"), path + ".n_samples");
    if (c.n_samples == 0) fail(path + ".n_samples", "must be positive");
  }
  if (j.contains("seed")) c.seed = get_unsigned(j.at("seed"), path + ".seed");
  if (j.contains("threads")) c.threads = static_cast<unsigned>(get_unsigned(j.at("threads"), path + ".threads"));
  if (j.contains("normalizer")) {
    c.normalizer = wrap(path + ".normalizer", [&] { return parse_normalizer(get_string(j.at("normalizer"), path + ".normalizer")); });
  }
  if (j.contains("sample_information")) {
    const json& s = j.at("sample_information");
    if (!s.is_array()) fail(path + ".sample_information", "expected an array");
    c.sample_information.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string ip = path + ".sample_information[" + std::to_string(i) + "]";
      check_keys(s[i], ip, {"factor", "n_s"});
      if (!s[i].contains("factor") || !s[i].contains("n_s")) fail(ip, "needs 'factor' and 'n_s'");
      SampleInformationRequest r;
      r.factor = get_string(s[i].at("factor"), ip + ".factor");
      const json& ns = s[i].at("n_s");
      if (!ns.is_array()) fail(ip + ".n_s", "expected an array of counts");
      for (std::size_t k = 0; k < ns.size(); ++k) {
        r.n_s.push_back(get_unsigned(ns[k], ip + ".n_s[" + std::to_string(k) + "]"));
      }
      c.sample_information.push_back(std::move(r));
    }
  }
  if (j.contains("full_model")) c.full_model = get_bool(j.at("full_model"), path + ".full_model");
  if (j.contains("knots")) {
    c.knots = get_unsigned(j.at("knots"), path + ".knots");
    if (c.knots < 2) fail(path + ".knots", "at least 2");
  }
  if (j.contains("mode")) {
    c.mode = wrap(path + ".mode", [&] { return parse_continuous_mode(get_string(j.at("mode"), path + ".mode")); });
  }
  if (j.contains("plot_data")) c.plot_data = get_bool(j.at("plot_data"), path + ".plot_data");
}

}  // namespace

RunConfig scenario_config(const std::string& scenario) {
  RunConfig c;
  if (scenario == kScenarioDiscrete) {
    c.problem = working_example_discrete();
    c.units = {{"M", "-"}, {"R1", "-"}, {"R2", "-"}, {"R3", "-"}, {"CF", "EUR"}, {"S", "-"}};
  } else if (scenario == kScenarioContinuous) {
    c.problem = working_example_continuous();
    c.units = {{"M", "-"}, {"XR", "-"}, {"CF", "EUR"}, {"S", "-"}, {"a", "-"}};
  } else {
    throw ConfigError("problem.scenario: unknown scenario '" + scenario + "' (expected " + kScenarioDiscrete +
                      " or " + kScenarioContinuous + ")");
  }
  c.scenario = scenario;
  return c;
}

RunConfig parse_config(const json& j) {
  check_keys(j, "config", {"problem", "analysis"});
  if (!j.contains("problem")) throw ConfigError("config: missing 'problem'");
  RunConfig c;
  parse_problem(j.at("problem"), c);
  if (j.contains("analysis")) parse_analysis(j.at("analysis"), c);
  const auto& prob = c.problem;
  auto check_name = [&](const std::string& name, const std::string& where) {
    for (const auto& f : prob.factors) {
      if (f.name == name) return;
    }
    // Inline problems without a factor list accept any column name.
    if (prob.factors.empty()) return;
    throw ConfigError(where + ": unknown factor '" + name + "'");
  };
  if (c.factors) {
    for (const auto& f : *c.factors) check_name(f, "analysis.factors");
  }
  for (const auto& g : c.groups) {
    for (const auto& f : g) check_name(f, "analysis.groups");
  }
  for (const auto& r : c.sample_information) check_name(r.factor, "analysis.sample_information");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON (" + std::string(e.what()) + ")");
  }
  return parse_config(j);
}

json to_json(const DistributionSpec& d) {
  json j;
  j["kind"] = std::string(to_string(d.kind()));
  switch (d.kind()) {
    case DistributionKind::gumbel:
      j["location"] = d.first();
      j["scale"] = d.second();
      break;
    case DistributionKind::normal:
    case DistributionKind::lognormal:
      j["mean"] = d.first();
      j["std"] = d.second();
      break;
    case DistributionKind::uniform:
      j["lower"] = d.first();
      j["upper"] = d.second();
      break;
  }
  return j;
}

DistributionSpec distribution_from_json(const json& j) { return parse_distribution(j, "distribution"); }

json to_json(const RunConfig& c) {
  json j;
  if (c.scenario) {
    j["problem"] = {{"scenario", *c.scenario}};
  } else {
    json p;
    p["factors"] = json::array();
    for (const auto& f : c.problem.factors) {
      json fj = {{"name", f.name},
                 {"distribution", to_json(f.dist)},
                 {"class", f.cls == FactorClass::aleatory ? "aleatory" : "epistemic"}};
      if (auto it = c.units.find(f.name); it != c.units.end()) fj["unit"] = it->second;
      p["factors"].push_back(fj);
    }
    if (c.problem.decisions.is_discrete()) {
      p["decisions"] = {{"labels", c.problem.decisions.labels()}};
    } else {
      p["decisions"] = {{"lower", c.problem.decisions.lower()}, {"upper", c.problem.decisions.upper()}};
    }
    if (const auto* cf = std::get_if<ClosedFormUtility>(&c.problem.utility)) {
      p["utility"] = {{"kind", cf->kind == ClosedFormKind::quadratic ? "quadratic" : "linex"},
                      {"c", cf->c},
                      {"gamma", cf->gamma},
                      {"outcome", cf->outcome}};
    } else {
      p["utility"] = {{"kind", "tabulated"}};
    }
    j["problem"] = p;
  }
  json a;
  if (c.factors) {
    a["factors"] = *c.factors;
  } else {
    a["factors"] = "all";
  }
  a["groups"] = c.groups;
  a["estimator"] = std::string(to_string(c.estimator));
  if (c.smoother) {
    a["smoother"] = {{"method", std::string(to_string(c.smoother->method))},
                     {"span", c.smoother->span},
                     {"degree", c.smoother->degree}};
    if (c.smoother->bandwidth) a["smoother"]["bandwidth"] = *c.smoother->bandwidth;
  }
  a["n_samples"] = c.n_samples;
  a["seed"] = c.seed;
  a["threads"] = c.threads;
  a["normalizer"] = std::string(to_string(c.normalizer));
  a["sample_information"] = json::array();
  for (const auto& r : c.sample_information) a["sample_information"].push_back({{"factor", r.factor}, {"n_s", r.n_s}});
  a["full_model"] = c.full_model;
  a["knots"] = c.knots;
  if (c.mode) a["mode"] = std::string(to_string(*c.mode));
  a["plot_data"] = c.plot_data;
  j["analysis"] = a;
  return j;
}

std::vector<std::vector<std::string>> analysis_groups(const RunConfig& c, const std::vector<std::string>& available) {
  std::vector<std::vector<std::string>> out;
  const std::vector<std::string> singles = c.factors ? *c.factors : available;
  for (const auto& f : singles) {
    if (std::find(available.begin(), available.end(), f) == available.end()) {
      throw ConfigError("analysis.factors: unknown factor '" + f + "'");
    }
    out.push_back({f});
  }
  for (const auto& g : c.groups) {
    for (const auto& f : g) {
      if (std::find(available.begin(), available.end(), f) == available.end()) {
        throw ConfigError("analysis.groups: unknown factor '" + f + "'");
      }
    }
    out.push_back(g);
  }
  return out;
}

}  // namespace voi
