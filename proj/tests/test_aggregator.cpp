#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cann/aggregator.hpp"
#include "cann/error.hpp"

using namespace cann;

namespace {

// Replays fixed predictions: script[day][expert].
class ScriptedSource final : public PredictionSource {
 public:
  explicit ScriptedSource(std::vector<std::vector<SaddleTriple>> script)
      : script_(std::move(script)) {}
  std::size_t size() const override { return script_.front().size(); }
  void observe(const MarketVector&) override { ++day_; }
  void predict(std::vector<SaddleTriple>& out) override {
    out = script_[std::min(day_, script_.size() - 1)];
  }

 private:
  std::vector<std::vector<SaddleTriple>> script_;
  std::size_t day_ = 0;
};

RiskConfig toy_risk() {
  RiskConfig r;
  r.alpha = 0.5;
  r.gamma = 0.1;
  r.bound_m = 1.0;
  r.lambda_max = 4.0;
  return r;
}

const MarketConfig kToyMarket{0.4, 0.0, 1.0};

}  // namespace

TEST_CASE("exponential weights") {
  ExpertLedger l = ExpertLedger::uniform(2);
  CHECK(weights(l, 0, Side::primal) == std::vector<double>{0.5, 0.5});
  CHECK(weights(l, 1, Side::dual) == std::vector<double>{0.5, 0.5});

  const std::size_t t = 9;
  l.primal = {0.0, std::sqrt(9.0) * std::log(2.0)};
  const auto w = weights(l, t, Side::primal);
  CHECK(w[0] == doctest::Approx(2.0 / 3.0));
  CHECK(w[1] == doctest::Approx(1.0 / 3.0));

  // The dual side rewards loss.
  double previous = 0.5;
  for (double gap : {0.5, 1.0, 2.0, 8.0, 1e5}) {
    l.dual = {gap, 0.0};
    const double w0 = weights(l, 4, Side::dual)[0];
    CHECK(w0 > previous);
    previous = w0;
  }
  CHECK(previous == doctest::Approx(1.0));

  l.prior = {0.25, 0.75};
  l.primal = {0.0, 0.0};
  CHECK(weights(l, 0, Side::primal)[1] == doctest::Approx(0.75));
  CHECK(weights(l, 5, Side::primal)[1] == doctest::Approx(0.75));

  CHECK(entropy(std::vector<double>{0.5, 0.5}) == doctest::Approx(std::log(2.0)));
  CHECK(entropy(std::vector<double>{1.0, 0.0}) == 0.0);
}

TEST_CASE("a single expert is copied") {
  const SaddleTriple a{Portfolio{{0.2, 0.5, 0.3}}, 0.1, 1.5};
  const SaddleTriple b{Portfolio{{0.6, 0.1, 0.3}}, -0.2, 0.5};
  ScriptedSource src({{a}, {b}, {a}});
  Aggregator agg(src, kToyMarket, toy_risk());
  CHECK(agg.played().portfolio.b == a.portfolio.b);
  agg.step(MarketVector{{1.1}});
  CHECK(agg.played().portfolio.b == b.portfolio.b);
  CHECK(agg.played().c == b.c);
  CHECK(agg.played().lambda == b.lambda);
}

TEST_CASE("identical experts keep uniform weights") {
  const SaddleTriple a{Portfolio{{0.2, 0.5, 0.3}}, 0.1, 1.5};
  ScriptedSource src({{a, a, a}});
  Aggregator agg(src, kToyMarket, toy_risk());
  for (double x : {1.1, 0.8, 1.3, 0.95}) {
    const StepRecord rec = agg.step(MarketVector{{x}});
    CHECK(rec.primal_entropy == doctest::Approx(std::log(3.0)));
    CHECK(rec.dual_entropy == doctest::Approx(std::log(3.0)));
    for (int j = 0; j < 3; ++j) CHECK(agg.played().portfolio.b[j] == doctest::Approx(a.portfolio.b[j]));
    CHECK(agg.played().lambda == doctest::Approx(a.lambda));
  }
}

TEST_CASE("three-day hand trace with two experts") {
  // Expert A: all cash, c = 0, lambda = 1. Expert B: all long, c = 0.1, lambda = 0.
  // alpha = 0.5 so the tail scale is 2; gamma = 0.1.
  const SaddleTriple a{Portfolio{{1.0, 0.0, 0.0}}, 0.0, 1.0};
  const SaddleTriple b{Portfolio{{0.0, 1.0, 0.0}}, 0.1, 0.0};
  ScriptedSource src({{a, b}});
  Aggregator agg(src, kToyMarket, toy_risk());

  // Day 1: uniform weights, so b = (0.5, 0.5, 0), c = 0.05, lambda = 0.5.
  CHECK(agg.played().c == doctest::Approx(0.05));
  CHECK(agg.played().lambda == doctest::Approx(0.5));
  StepRecord r1 = agg.step(MarketVector{{1.1}});
  const double w1 = -std::log(1.05);
  CHECK(r1.daily_return == doctest::Approx(1.05));
  CHECK(r1.omega == doctest::Approx(w1));
  // played loss: w1 + 0.5 (0.05 + 2 (w1 - 0.05)^+ - 0.1) with w1 < 0.05
  CHECK(r1.lagrangian == doctest::Approx(w1 + 0.5 * (0.05 - 0.1)));
  // A: omega 0 against lambda 0.5 -> 0.5 (0 - 0.1) = -0.05
  // B: omega -log 1.1 against lambda 0.5 -> -log 1.1 + 0.5 (0.1 - 0.1)
  CHECK(agg.ledger().primal[0] == doctest::Approx(-0.05));
  CHECK(agg.ledger().primal[1] == doctest::Approx(-std::log(1.1)));
  // Dual charges the played (b, c) against each lambda.
  CHECK(agg.ledger().dual[0] == doctest::Approx(w1 + 1.0 * (0.05 - 0.1)));
  CHECK(agg.ledger().dual[1] == doctest::Approx(w1));

  // Day 2 weights at t = 1.
  const double pa = 1.0 / (1.0 + std::exp(std::log(1.1) - 0.05));
  const double qa = 1.0 / (1.0 + std::exp(0.05));
  CHECK(agg.played().portfolio.b[0] == doctest::Approx(pa));
  CHECK(agg.played().portfolio.b[1] == doctest::Approx(1.0 - pa));
  CHECK(agg.played().c == doctest::Approx((1.0 - pa) * 0.1));
  CHECK(agg.played().lambda == doctest::Approx(qa));

  StepRecord r2 = agg.step(MarketVector{{0.9}});
  const double ret2 = pa + (1.0 - pa) * 0.9;
  const double w2 = -std::log(ret2);
  const double c2 = (1.0 - pa) * 0.1;
  CHECK(r2.omega == doctest::Approx(w2));
  const double wb = -std::log(0.9);
  const double la_a2 = -0.05 + qa * (0.0 - 0.1);
  const double la_b2 = -std::log(1.1) + wb + qa * (0.1 + 2.0 * (wb - 0.1 > 0 ? wb - 0.1 : 0.0) - 0.1);
  const double ld_a2 = w1 - 0.05 + w2 + (c2 + 2.0 * std::max(w2 - c2, 0.0) - 0.1);
  const double ld_b2 = w1 + w2;
  CHECK(agg.ledger().primal[0] == doctest::Approx(la_a2));
  CHECK(agg.ledger().primal[1] == doctest::Approx(la_b2));
  CHECK(agg.ledger().dual[0] == doctest::Approx(ld_a2));
  CHECK(agg.ledger().dual[1] == doctest::Approx(ld_b2));

  // Day 3 weights at t = 2.
  const double s = 1.0 / std::sqrt(2.0);
  const double pa3 = 1.0 / (1.0 + std::exp(-s * (la_b2 - la_a2)));
  const double qa3 = 1.0 / (1.0 + std::exp(s * (ld_b2 - ld_a2)));
  CHECK(agg.played().portfolio.b[0] == doctest::Approx(pa3));
  CHECK(agg.played().lambda == doctest::Approx(qa3));
  agg.step(MarketVector{{1.2}});
  CHECK(agg.day() == 3);
}

TEST_CASE("mixtures stay feasible") {
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double mass = 2.5, m = 8.0, lmax = 600.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SaddleTriple> preds(1 + trial % 9);
    std::vector<double> p(preds.size()), q(preds.size());
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      preds[i].portfolio.b.resize(5);
      double s = 0.0;
      for (double& v : preds[i].portfolio.b) s += (v = e(rng));
      for (double& v : preds[i].portfolio.b) v *= mass / s;
      preds[i].c = (2 * unit(rng) - 1) * m;
      preds[i].lambda = unit(rng) * lmax;
      sp += (p[i] = e(rng));
      sq += (q[i] = e(rng));
    }
    for (auto& v : p) v /= sp;
    for (auto& v : q) v /= sq;
    const SaddleTriple mix = mixture(preds, p, q);
    CHECK(mix.portfolio.feasible(mass, 1e-9));
    CHECK(std::abs(mix.c) <= m);
    CHECK(mix.lambda >= 0.0);
    CHECK(mix.lambda <= lmax);
  }
}

TEST_CASE("identity markets leave wealth unchanged") {
  const SaddleTriple a{Portfolio{{0.2, 0.5, 0.3}}, 0.1, 1.5};
  const SaddleTriple b{Portfolio{{0.6, 0.1, 0.3}}, -0.2, 0.5};
  ScriptedSource src({{a, b}});
  Aggregator agg(src, kToyMarket, toy_risk());
  const std::vector<MarketVector> markets(20, MarketVector{{1.0}});
  for (const auto& rec : run(agg, markets)) {
    CHECK(rec.daily_return == doctest::Approx(1.0));
    CHECK(std::abs(rec.omega) < 1e-15);
  }
}

TEST_CASE("priors are validated") {
  const SaddleTriple a{Portfolio{{1.0, 0.0, 0.0}}, 0.0, 0.0};
  ScriptedSource src({{a, a}});
  CHECK_THROWS_AS(Aggregator(src, kToyMarket, toy_risk(), {1.0}), ConfigError);
  CHECK_THROWS_AS(Aggregator(src, kToyMarket, toy_risk(), {1.0, 0.0}), ConfigError);
  Aggregator agg(src, kToyMarket, toy_risk(), {3.0, 1.0});
  CHECK(agg.ledger().prior[0] == doctest::Approx(0.75));
}
