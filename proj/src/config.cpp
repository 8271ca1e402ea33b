#include "cann/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cann/error.hpp"

namespace cann {

namespace {

using nlohmann::json;

std::string child(const std::string& at, const std::string& key) { return at + "/" + key; }

void allow_keys(const json& obj, const std::string& at, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(at.empty() ? "/" : at, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError(child(at, k), "unknown field");
}

double get_number(const json& obj, const std::string& at, const char* key, double fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(child(at, key), "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& obj, const std::string& at, const char* key,
                        std::uint64_t fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError(child(at, key), "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& at, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(child(at, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& v, const std::string& at) {
  if (!v.is_array()) throw ConfigError(at, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(child(at, std::to_string(i)), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

IidLaw parse_assets(const json& v, const std::string& at) {
  if (!v.is_array() || v.empty()) throw ConfigError(at, "expected a nonempty array of asset laws");
  IidLaw law;
  for (std::size_t a = 0; a < v.size(); ++a) {
    const std::string here = child(at, std::to_string(a));
    allow_keys(v[a], here, {"points", "probs"});
    if (!v[a].contains("points")) throw ConfigError(child(here, "points"), "missing");
    AssetLaw asset;
    asset.points = get_numbers(v[a].at("points"), child(here, "points"));
    if (v[a].contains("probs")) {
      asset.probs = get_numbers(v[a].at("probs"), child(here, "probs"));
    } else {
      asset.probs.assign(asset.points.size(), 1.0 / static_cast<double>(asset.points.size()));
    }
    law.push_back(std::move(asset));
  }
  return law;
}

}  // namespace

MarketSection parse_market_section(const json& doc, const std::string& at,
                                   const std::filesystem::path& base) {
  allow_keys(doc, at,
             {"source", "path", "name", "days", "B", "r", "L", "transition", "states", "assets",
              "jitter", "seed"});
  MarketSection m;
  const std::string source = get_string(doc, at, "source", "csv");
  if (source == "csv") {
    m.source = MarketSource::csv;
    if (!doc.contains("path")) throw ConfigError(child(at, "path"), "missing for a csv source");
    m.path = get_string(doc, at, "path", "");
    if (m.path.is_relative() && !base.empty()) m.path = base / m.path;
  } else if (source == "iid" || source == "markov") {
    m.source = source == "iid" ? MarketSource::iid : MarketSource::markov;
    m.days = get_count(doc, at, "days", 0);
    if (m.days == 0) throw ConfigError(child(at, "days"), "must be >= 1 for a synthetic source");
    if (m.source == MarketSource::iid) {
      if (!doc.contains("assets")) throw ConfigError(child(at, "assets"), "missing");
      m.spec.transition = {{1.0}};
      m.spec.emissions = {parse_assets(doc.at("assets"), child(at, "assets"))};
    } else {
      if (!doc.contains("transition")) throw ConfigError(child(at, "transition"), "missing");
      const json& tr = doc.at("transition");
      if (!tr.is_array()) throw ConfigError(child(at, "transition"), "expected an array of rows");
      for (std::size_t i = 0; i < tr.size(); ++i)
        m.spec.transition.push_back(get_numbers(tr[i], child(child(at, "transition"), std::to_string(i))));
      if (!doc.contains("states")) throw ConfigError(child(at, "states"), "missing");
      const json& st = doc.at("states");
      if (!st.is_array()) throw ConfigError(child(at, "states"), "expected an array");
      for (std::size_t s = 0; s < st.size(); ++s) {
        const std::string here = child(child(at, "states"), std::to_string(s));
        allow_keys(st[s], here, {"assets"});
        if (!st[s].contains("assets")) throw ConfigError(child(here, "assets"), "missing");
        m.spec.emissions.push_back(parse_assets(st[s].at("assets"), child(here, "assets")));
      }
    }
    m.spec.jitter = get_number(doc, at, "jitter", 0.0);
    m.spec.seed = get_count(doc, at, "seed", 0);
  } else {
    throw ConfigError(child(at, "source"), "expected one of csv, iid, markov");
  }
  m.name = get_string(doc, at, "name", source == "csv" ? m.path.stem().string() : source);

  const double bound = get_number(doc, at, "B", 0.4);
  const double rate = get_number(doc, at, "r", 0.000245);
  m.market = MarketConfig::with_default_leverage(bound, rate);
  m.market.leverage = get_number(doc, at, "L", m.market.leverage);
  try {
    m.market.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(at + e.path().substr(std::string("/market").size()), e.message());
  }
  if (m.source != MarketSource::csv) {
    try {
      m.spec.validate(m.market.bound);
    } catch (const ConfigError& e) {
      throw ConfigError(at + e.path(), e.message());
    }
  }
  return m;
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base) {
  allow_keys(doc, "", {"market", "risk", "experts", "solver", "strategies", "sweep", "output",
                       "seed", "workers"});
  ExperimentConfig cfg;
  cfg.source = doc;
  if (!doc.contains("market")) throw ConfigError("/market", "missing");
  cfg.market = parse_market_section(doc.at("market"), "/market", base);

  const json risk = doc.value("risk", json::object());
  allow_keys(risk, "/risk", {"alpha", "gamma", "slater_slack"});
  cfg.risk.alpha = get_number(risk, "/risk", "alpha", 0.95);
  cfg.risk.gamma = get_number(risk, "/risk", "gamma", 0.05);
  if (risk.contains("slater_slack") && !risk.at("slater_slack").is_null())
    cfg.risk.slater_slack = get_number(risk, "/risk", "slater_slack", 0.0);

  const json experts = doc.value("experts", json::object());
  allow_keys(experts, "/experts", {"k_max", "h_max", "p"});
  cfg.grid.k_max = static_cast<int>(get_count(experts, "/experts", "k_max", 5));
  cfg.grid.h_max = static_cast<int>(get_count(experts, "/experts", "h_max", 10));
  cfg.grid.schedule = NeighborSchedule::standard(cfg.grid.h_max);
  if (experts.contains("p")) cfg.grid.schedule.fractions = get_numbers(experts.at("p"), "/experts/p");
  cfg.grid.validate();

  const json solver = doc.value("solver", json::object());
  allow_keys(solver, "/solver", {"method", "tol", "max_iters", "merge_quantum", "regularizer_scale"});
  cfg.solver.method = parse_solver_method(get_string(solver, "/solver", "method", "newton"));
  cfg.solver.tol = get_number(solver, "/solver", "tol", 1e-6);
  cfg.solver.max_iters = static_cast<int>(get_count(solver, "/solver", "max_iters", 5000));
  cfg.solver.merge_quantum = get_number(solver, "/solver", "merge_quantum", 0.0);
  cfg.solver.regularizer_scale = get_number(solver, "/solver", "regularizer_scale", 1.0);
  cfg.solver.validate();

  const json strategies = doc.value("strategies", json::array({"cann"}));
  if (!strategies.is_array()) throw ConfigError("/strategies", "expected an array");
  static const std::set<std::string> known = {"cann", "bcrp", "eg", "ons", "up", "bnn", "bnn_leveraged"};
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const std::string at = "/strategies/" + std::to_string(i);
    StrategySpec s;
    if (strategies[i].is_string()) {
      s.name = strategies[i].get<std::string>();
    } else if (strategies[i].is_object()) {
      s.name = get_string(strategies[i], at, "name", "");
      s.params = strategies[i];
      s.params.erase("name");
    } else {
      throw ConfigError(at, "expected a strategy name or object");
    }
    if (!known.count(s.name)) throw ConfigError(at, "unknown strategy '" + s.name + "'");
    for (const auto& [k, v] : s.params.items()) {
      static const std::map<std::string, std::set<std::string>> params = {
          {"cann", {"gamma"}}, {"bcrp", {}}, {"eg", {"eta"}}, {"ons", {"eta", "beta", "delta"}},
          {"up", {"samples"}}, {"bnn", {}}, {"bnn_leveraged", {"regularize"}}};
      if (!params.at(s.name).count(k)) throw ConfigError(at + "/" + k, "unknown parameter");
      if (k == "regularize" ? !v.is_boolean() : !v.is_number())
        throw ConfigError(at + "/" + k, "wrong type");
    }
    cfg.strategies.push_back(std::move(s));
  }

  if (doc.contains("sweep")) {
    const json& sweep = doc.at("sweep");
    allow_keys(sweep, "/sweep", {"gamma"});
    if (sweep.contains("gamma")) cfg.sweep_gammas = get_numbers(sweep.at("gamma"), "/sweep/gamma");
    for (std::size_t i = 0; i < cfg.sweep_gammas.size(); ++i)
      if (!(cfg.sweep_gammas[i] > 0.0))
        throw ConfigError("/sweep/gamma/" + std::to_string(i), "must be > 0");
  }

  const json output = doc.value("output", json::object());
  allow_keys(output, "/output", {"dir", "cvar_window", "histogram_bins"});
  cfg.output.dir = get_string(output, "/output", "dir", "out");
  if (cfg.output.dir.is_relative() && !base.empty()) cfg.output.dir = base / cfg.output.dir;
  cfg.output.cvar_window = get_count(output, "/output", "cvar_window", 250);
  cfg.output.histogram_bins = get_count(output, "/output", "histogram_bins", 200);
  if (cfg.output.cvar_window == 0) throw ConfigError("/output/cvar_window", "must be >= 1");
  if (cfg.output.histogram_bins == 0) throw ConfigError("/output/histogram_bins", "must be >= 1");

  cfg.seed = get_count(doc, "", "seed", 0);
  cfg.workers = get_count(doc, "", "workers", 1);
  if (cfg.workers == 0) throw ConfigError("/workers", "must be >= 1");
  if (!(cfg.risk.alpha > 0.0 && cfg.risk.alpha < 1.0)) throw ConfigError("/risk/alpha", "must lie in (0, 1)");
  if (!(cfg.risk.gamma > 0.0)) throw ConfigError("/risk/gamma", "must be > 0");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

std::string config_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace cann
