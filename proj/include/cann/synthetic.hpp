#pragma once

// Stationary ergodic test markets: i.i.d. draws and hidden Markov chains with
// discrete per-asset emissions, plus the exact conditional laws an oracle
// needs to score a strategy against them.

#include <cstdint>
#include <vector>

#include "cann/objective.hpp"
#include "cann/saddle_solver.hpp"

namespace cann {

/// Discrete law of one asset's relative price.
struct AssetLaw {
  std::vector<double> points;
  std::vector<double> probs;
};

/// Independent assets.
using IidLaw = std::vector<AssetLaw>;

struct MarkovMarketSpec {
  std::vector<std::vector<double>> transition;  // row-stochastic, S x S
  std::vector<IidLaw> emissions;                // per state
  double jitter = 0.0;  // width of the uniform noise added to every emission
  std::uint64_t seed = 0;

  std::size_t states() const noexcept { return transition.size(); }
  std::size_t assets() const noexcept { return emissions.empty() ? 0 : emissions.front().size(); }
  /// Throws ConfigError: shapes, stochastic rows, support inside [1-B, 1+B],
  /// and an irreducible aperiodic chain.
  void validate(double bound) const;
};

/// Draws T market vectors. Deterministic in the seed.
std::vector<MarketVector> gen_iid(const IidLaw& law, std::size_t days, std::uint64_t seed);

struct MarkovPath {
  std::vector<MarketVector> markets;  // day t is emitted by states[t + 1]
  std::vector<std::size_t> states;    // days + 1 entries, states[0] ~ stationary
};

/// Samples the chain from its stationary law, emits, jitters and clips.
MarkovPath gen_markov(const MarkovMarketSpec& spec, std::size_t days, double bound);

/// Stationary distribution (left Perron eigenvector, normalised).
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition);

/// Finite-support law of a market vector.
struct DiscreteLaw {
  std::vector<MarketVector> points;
  std::vector<double> probs;
};

DiscreteLaw product_law(const IidLaw& law);

/// Law of the next day's market given the current hidden state (jitter excluded).
DiscreteLaw conditional_law(const MarkovMarketSpec& spec, std::size_t state);

/// E[omega(b, X)] and CVaR_alpha(omega(b, X)) under a discrete law.
double expected_loss(const Portfolio& b, const DiscreteLaw& law, const MarketConfig& market);
double conditional_cvar(const Portfolio& b, const DiscreteLaw& law, double alpha,
                        const MarketConfig& market);

struct StateOptimum {
  SaddleTriple triple;
  double value = 0.0;  // E[omega] at the optimum
  double cvar = 0.0;   // CVaR_alpha of omega at the optimum
  bool feasible = true;
};

struct TrueOptimum {
  std::vector<StateOptimum> per_state;
  std::vector<double> stationary;
  double value = 0.0;  // V*_gamma, stationary average of the per-state values
  bool feasible = true;
};

/// Per-state solution of  min E[omega]  s.t.  CVaR_alpha(omega) <= gamma
/// under the exact conditional law, via the saddle solver with a vanishing
/// regularizer.
TrueOptimum true_optimum(const MarkovMarketSpec& spec, const MarketConfig& market,
                         const RiskConfig& risk, double reg = 1e-7);

}  // namespace cann
