#pragma once

// Reference strategies. All of them report the daily return sequence they
// realise on the given markets.

#include <cstdint>
#include <span>
#include <vector>

#include "cann/market_data.hpp"
#include "cann/neighbors.hpp"

namespace cann {

/// Best constant rebalanced portfolio in hindsight over the long-only simplex.
std::vector<double> bcrp(std::span<const MarketVector> markets, double tol = 1e-10);

/// Daily returns of a constant rebalanced portfolio.
std::vector<double> crp_returns(std::span<const MarketVector> markets, std::span<const double> b);

/// b_i <- b_i exp(eta x_i / <b, x>), renormalised.
std::vector<double> eg_step(std::span<const double> b, const MarketVector& x, double eta);
std::vector<double> eg_run(std::span<const MarketVector> markets, double eta = 0.05);

/// Online Newton step in the form of the standard OLPS toolkit:
/// A = I + sum g g^T, p = delta A^{-1} (1 + 1/beta) sum g, b = proj_A(p)
/// mixed with eta of the uniform portfolio, g = x / <b, x>.
class Ons {
 public:
  explicit Ons(std::size_t n, double eta = 0.0, double beta = 1.0, double delta = 0.125);
  const std::vector<double>& portfolio() const noexcept { return b_; }
  void update(const MarketVector& x);

 private:
  std::size_t n_;
  double eta_, beta_, delta_;
  std::vector<double> a_;      // row-major n x n
  std::vector<double> b_hat_;  // (1 + 1/beta) sum g
  std::vector<double> b_;
};
std::vector<double> ons_run(std::span<const MarketVector> markets, double eta = 0.0,
                            double beta = 1.0, double delta = 0.125);

/// Cover's universal portfolio approximated by `samples` CRPs drawn from
/// Dirichlet(1, ..., 1).
std::vector<double> up_approx(std::span<const MarketVector> markets, std::size_t samples,
                              std::uint64_t seed);

struct NearestNeighborConfig {
  ExpertGrid grid;
  double merge_quantum = 0.0;
  std::size_t workers = 1;
  /// Leveraged variant only: also subtract the expert regularizer
  /// (1/t + 1/h + 1/k) |b|^2 from the empirical growth rate.
  bool regularize = false;
  double regularizer_scale = 1.0;
};

/// Long-only nearest-neighbour strategy: each (k, h) expert holds the
/// log-optimal portfolio of its matched set, experts are weighted by prior
/// times their own wealth.
std::vector<double> bnn_run(std::span<const MarketVector> markets,
                            const NearestNeighborConfig& config);

/// Same over the transformed instruments with mass L and the leverage offset.
std::vector<double> bnn_leveraged_run(std::span<const MarketVector> markets,
                                      const NearestNeighborConfig& config,
                                      const MarketConfig& market);

/// Per-expert portfolios of the leveraged strategy for the day after
/// `history` (reference path used by consistency checks).
std::vector<std::vector<double>> bnn_leveraged_experts(std::span<const MarketVector> history,
                                                       const NearestNeighborConfig& config,
                                                       const MarketConfig& market);

}  // namespace cann
