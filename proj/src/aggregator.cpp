#include "cann/aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cann/error.hpp"

namespace cann {

ExpertLedger ExpertLedger::uniform(std::size_t experts) {
  ExpertLedger l;
  l.primal.assign(experts, 0.0);
  l.dual.assign(experts, 0.0);
  l.prior.assign(experts, 1.0 / static_cast<double>(experts));
  return l;
}

std::vector<double> weights(const ExpertLedger& ledger, std::size_t t, Side side) {
  const std::size_t n = ledger.size();
  std::vector<double> w(ledger.prior);
  if (t == 0 || n == 0) return w;
  const double rate = 1.0 / std::sqrt(static_cast<double>(t));
  const auto& loss = side == Side::primal ? ledger.primal : ledger.dual;
  const double sign = side == Side::primal ? -1.0 : 1.0;
  std::vector<double> logw(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    logw[i] = std::log(ledger.prior[i]) + sign * rate * loss[i];
    top = std::max(top, logw[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(logw[i] - top);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

SaddleTriple mixture(std::span<const SaddleTriple> predictions, std::span<const double> primal,
                     std::span<const double> dual) {
  SaddleTriple m;
  if (predictions.empty()) return m;
  const std::size_t d = predictions.front().portfolio.size();
  m.portfolio.b.assign(d, 0.0);
  for (std::size_t e = 0; e < predictions.size(); ++e) {
    const auto& p = predictions[e];
    for (std::size_t j = 0; j < d; ++j) m.portfolio.b[j] += primal[e] * p.portfolio.b[j];
    m.c += primal[e] * p.c;
    m.lambda += dual[e] * p.lambda;
  }
  return m;
}

Aggregator::Aggregator(PredictionSource& source, const MarketConfig& market,
                       const RiskConfig& risk, std::vector<double> prior)
    : source_(source), market_(market), risk_(risk) {
  const std::size_t n = source_.size();
  if (n == 0) throw ConfigError("/experts", "the pool is empty");
  ledger_ = ExpertLedger::uniform(n);
  if (!prior.empty()) {
    if (prior.size() != n) throw ConfigError("/experts/prior", "needs one weight per expert");
    const double total = std::accumulate(prior.begin(), prior.end(), 0.0);
    for (double v : prior)
      if (!(v > 0.0)) throw ConfigError("/experts/prior", "weights must be positive");
    for (double& v : prior) v /= total;
    ledger_.prior = std::move(prior);
  }
  source_.predict(predictions_);
  remix();
}

void Aggregator::remix() {
  primal_w_ = weights(ledger_, t_, Side::primal);
  dual_w_ = weights(ledger_, t_, Side::dual);
  played_ = mixture(predictions_, primal_w_, dual_w_);
}

StepRecord Aggregator::step(const MarketVector& x) {
  const TransformedVector xt = transform(x, market_.rate);
  const double offset = market_.offset();
  StepRecord rec;
  rec.played = played_;
  rec.primal_entropy = entropy(primal_w_);
  rec.dual_entropy = entropy(dual_w_);
  rec.daily_return = daily_return(played_.portfolio.view(), xt.view(), offset);
  rec.omega = omega(played_.portfolio.view(), xt.view(), offset);
  rec.lagrangian = lagrangian_from_loss(rec.omega, played_.c, played_.lambda, risk_);

  for (std::size_t e = 0; e < predictions_.size(); ++e) {
    const SaddleTriple& p = predictions_[e];
    const double w_e = omega(p.portfolio.view(), xt.view(), offset);
    ledger_.primal[e] += lagrangian_from_loss(w_e, p.c, played_.lambda, risk_);
    ledger_.dual[e] += lagrangian_from_loss(rec.omega, played_.c, p.lambda, risk_);
  }
  ++t_;
  source_.observe(x);
  source_.predict(predictions_);
  remix();
  return rec;
}

std::vector<StepRecord> run(Aggregator& aggregator, std::span<const MarketVector> markets) {
  std::vector<StepRecord> out;
  out.reserve(markets.size());
  for (const auto& x : markets) out.push_back(aggregator.step(x));
  return out;
}

}  // namespace cann
