#include "cann/expert_pool.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cann/error.hpp"

namespace cann {

SaddleTriple default_triple(std::size_t n_assets, const MarketConfig& market,
                            const RiskConfig& risk) {
  SaddleTriple t;
  t.portfolio = Portfolio::all_cash(2 * n_assets + 1, market.leverage);
  t.c = std::clamp(-std::log1p(market.rate), -risk.bound_m, risk.bound_m);
  t.lambda = 0.0;
  return t;
}

SaddleTriple expert_predict(ExpertId id, std::span<const MarketVector> history,
                            const MarketConfig& market, const RiskConfig& risk,
                            const NeighborSchedule& schedule, const SolverParams& solver) {
  const std::size_t n_assets = history.empty() ? 0 : history.front().size();
  const MatchedSet set = matched_set(history, id, schedule);
  if (set.empty()) return default_triple(n_assets, market, risk);
  SampleSet samples(2 * n_assets + 1);
  for (std::size_t day : set.days) samples.add(transform(history[day], market.rate).x, 1.0);
  samples.finalize();
  const double reg = solver.regularizer_scale * expert_regularizer(history.size(), id.h, id.k);
  return solve_saddle(samples, SaddleSpec::make(market, risk, reg), solver).triple;
}

ExpertPool::ExpertPool(ExpertPoolConfig config)
    : config_(std::move(config)), sampler_(config_.grid, config_.solver.merge_quantum) {
  config_.market.validate();
  config_.risk.validate();
  config_.solver.validate();
  if (config_.n_assets == 0) throw ConfigError("/market/n", "the pool needs at least one asset");
  n_assets_ = config_.n_assets;
  workers_ = std::make_unique<WorkerPool>(std::max<std::size_t>(1, config_.workers));
  previous_.resize(size());
  has_previous_.assign(size(), 0);
  last_.resize(size());
  solved_.assign(size(), 0);
}

void ExpertPool::observe(const MarketVector& x) {
  if (x.size() != n_assets_)
    throw DataError("day " + std::to_string(sampler_.days() + 1) + ": expected " +
                    std::to_string(n_assets_) + " assets, got " + std::to_string(x.size()));
  sampler_.append(x);
  while (transformed_.size() < sampler_.distinct())
    transformed_.push_back(
        transform(sampler_.representative(static_cast<std::uint32_t>(transformed_.size())),
                  config_.market.rate));
}

void ExpertPool::predict(std::vector<SaddleTriple>& out) {
  out.resize(size());
  const std::size_t t = sampler_.days();
  if (t == 0) {
    for (auto& o : out) o = default_triple(n_assets_, config_.market, config_.risk);
    return;
  }
  sampler_.matched(matched_);
  const std::size_t dim = 2 * n_assets_ + 1;
  workers_->for_each(size(), [&](std::size_t e) {
    const WeightedIds& set = matched_[e];
    last_[e] = {};
    solved_[e] = 0;
    if (set.empty()) {
      out[e] = default_triple(n_assets_, config_.market, config_.risk);
      has_previous_[e] = 0;
      return;
    }
    SampleSet samples(dim);
    samples.reserve(set.ids.size());
    for (std::size_t j = 0; j < set.ids.size(); ++j)
      samples.add(transformed_[set.ids[j]].x, set.counts[j]);
    samples.finalize();
    const ExpertId id = config_.grid.id(e);
    const SaddleSpec spec =
        SaddleSpec::make(config_.market, config_.risk,
                         config_.solver.regularizer_scale * expert_regularizer(t, id.h, id.k));
    const SaddleTriple* warm =
        config_.warm_start && has_previous_[e] ? &previous_[e] : nullptr;
    SaddleResult r = solve_saddle(samples, spec, config_.solver, warm);
    out[e] = r.triple;
    previous_[e] = std::move(r.triple);
    has_previous_[e] = 1;
    last_[e] = r.diagnostics;
    solved_[e] = 1;
  });
  for (std::size_t e = 0; e < size(); ++e) {
    if (!solved_[e]) continue;
    ++diagnostics_.solves;
    diagnostics_.iterations += static_cast<std::uint64_t>(last_[e].iterations);
    if (!last_[e].converged) ++diagnostics_.nonconverged;
    diagnostics_.worst_residual = std::max(diagnostics_.worst_residual, last_[e].residual);
  }
}

}  // namespace cann
