#pragma once

// Twin exponential weights over a pool of experts. The (b, c) side weights
// experts by exp(-L_b / sqrt(t)), the lambda side by exp(+L_lambda / sqrt(t)),
// where the ledgers charge each expert's own half of the triple against the
// played other half.

#include <cstddef>
#include <span>
#include <vector>

#include "cann/prediction_source.hpp"

namespace cann {

struct ExpertLedger {
  std::vector<double> primal;  // L_b
  std::vector<double> dual;    // L_lambda
  std::vector<double> prior;   // beta, sums to 1

  static ExpertLedger uniform(std::size_t experts);
  std::size_t size() const noexcept { return prior.size(); }
};

enum class Side { primal, dual };

/// Normalised weights after t revealed days; the priors when t == 0.
std::vector<double> weights(const ExpertLedger& ledger, std::size_t t, Side side);

/// Shannon entropy (nats) of a probability vector.
double entropy(std::span<const double> p);

/// (b, c) averaged under `primal`, lambda under `dual`.
SaddleTriple mixture(std::span<const SaddleTriple> predictions, std::span<const double> primal,
                     std::span<const double> dual);

struct StepRecord {
  SaddleTriple played;
  double daily_return = 0.0;
  double omega = 0.0;
  double lagrangian = 0.0;
  double primal_entropy = 0.0;  // of the weights used to play this day
  double dual_entropy = 0.0;
};

class Aggregator {
 public:
  /// Empty `prior` means uniform.
  Aggregator(PredictionSource& source, const MarketConfig& market, const RiskConfig& risk,
             std::vector<double> prior = {});

  /// Triple to be played on the next day.
  const SaddleTriple& played() const noexcept { return played_; }
  std::span<const SaddleTriple> predictions() const noexcept { return predictions_; }
  const ExpertLedger& ledger() const noexcept { return ledger_; }
  std::size_t day() const noexcept { return t_; }

  /// Reveals x: charges the played triple, updates both ledgers, then asks
  /// the source for the next predictions and re-mixes.
  StepRecord step(const MarketVector& x);

 private:
  void remix();

  PredictionSource& source_;
  MarketConfig market_;
  RiskConfig risk_;
  ExpertLedger ledger_;
  std::vector<SaddleTriple> predictions_;
  SaddleTriple played_;
  std::vector<double> primal_w_, dual_w_;
  std::size_t t_ = 0;
};

/// Runs the aggregator over a whole sequence.
std::vector<StepRecord> run(Aggregator& aggregator, std::span<const MarketVector> markets);

}  // namespace cann
