#pragma once

// Run configuration: one JSON document with sections market, risk, experts,
// solver, strategies, sweep and output. Errors name the offending field as a
// JSON pointer.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cann/neighbors.hpp"
#include "cann/saddle_solver.hpp"
#include "cann/synthetic.hpp"

namespace cann {

enum class MarketSource { csv, iid, markov };

struct MarketSection {
  MarketSource source = MarketSource::csv;
  std::filesystem::path path;  // csv
  std::string name;            // label in the wealth table
  std::size_t days = 0;        // synthetic
  MarkovMarketSpec spec;       // synthetic; iid is a one-state chain
  MarketConfig market;
};

struct RiskSection {
  double alpha = 0.95;
  double gamma = 0.05;
  std::optional<double> slater_slack;
};

struct StrategySpec {
  std::string name;  // cann, bcrp, eg, ons, up, bnn, bnn_leveraged
  nlohmann::json params = nlohmann::json::object();
};

struct OutputSection {
  std::filesystem::path dir = "out";
  std::size_t cvar_window = 250;
  std::size_t histogram_bins = 200;
};

struct ExperimentConfig {
  MarketSection market;
  RiskSection risk;
  ExpertGrid grid;
  SolverParams solver;
  std::vector<StrategySpec> strategies;
  std::vector<double> sweep_gammas;
  OutputSection output;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  nlohmann::json source;  // the document as parsed, after overrides
};

/// Relative paths in the document resolve against `base`.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses a market section on its own (the `gen` input format).
MarketSection parse_market_section(const nlohmann::json& doc, const std::string& at,
                                   const std::filesystem::path& base = {});

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

}  // namespace cann
