#pragma once

// Experiment driver behind the CLI: loads or generates the market, runs the
// configured strategies and gamma sweep, and writes the report files.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cann/aggregator.hpp"
#include "cann/config.hpp"
#include "cann/expert_pool.hpp"

namespace cann {

struct CannRun {
  std::vector<StepRecord> days;
  PoolDiagnostics diagnostics;
};

/// CANN over a whole sequence with the standard expert pool.
CannRun run_cann(std::span<const MarketVector> markets, const MarketConfig& market,
                 const RiskConfig& risk, const ExpertGrid& grid, const SolverParams& solver,
                 std::size_t workers = 1);

RiskConfig risk_for(const ExperimentConfig& cfg, double gamma);

/// Market vectors for the configured source (clipped to the bound).
std::vector<MarketVector> load_markets(const MarketSection& section);

enum class RunMode {
  run,    // strategies, plus the sweep when configured
  sweep,  // the gamma sweep only
};

struct ExperimentOutput {
  nlohmann::json report;
  int exit_code = 0;  // 0, or 3 when some strategy failed
};

/// Runs everything and writes report.json, wealth_table.csv, gamma_sweep.csv,
/// return_histogram.csv, frontier.csv and daily_returns.csv into the output
/// directory.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, RunMode mode = RunMode::run);

std::string format_double(double v);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cann
