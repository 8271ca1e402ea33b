#pragma once

// The (k, h) nearest-neighbour experts. Expert (k, h) predicts day t from the
// saddle point of the regularized Lagrangian over its matched set, with
// regularizer weight 1/t + 1/h + 1/k.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cann/neighbors.hpp"
#include "cann/parallel.hpp"
#include "cann/prediction_source.hpp"
#include "cann/saddle_solver.hpp"

namespace cann {

/// All cash, c = -log(1+r) clamped into [-M, M], lambda = 0.
SaddleTriple default_triple(std::size_t n_assets, const MarketConfig& market,
                            const RiskConfig& risk);

/// Direct evaluation of one expert from the full history (reference path).
SaddleTriple expert_predict(ExpertId id, std::span<const MarketVector> history,
                            const MarketConfig& market, const RiskConfig& risk,
                            const NeighborSchedule& schedule, const SolverParams& solver);

struct PoolDiagnostics {
  std::uint64_t solves = 0;
  std::uint64_t nonconverged = 0;
  std::uint64_t iterations = 0;
  double worst_residual = 0.0;
};

struct ExpertPoolConfig {
  std::size_t n_assets = 1;
  MarketConfig market;
  RiskConfig risk;
  ExpertGrid grid;
  SolverParams solver;
  std::size_t workers = 1;
  bool warm_start = true;
};

/// Incremental pool: one shared NeighborSampler, per-expert warm starts,
/// experts solved in parallel into index-ordered slots.
class ExpertPool final : public PredictionSource {
 public:
  explicit ExpertPool(ExpertPoolConfig config);

  std::size_t size() const override { return config_.grid.size(); }
  void observe(const MarketVector& x) override;
  void predict(std::vector<SaddleTriple>& out) override;

  const ExpertPoolConfig& config() const noexcept { return config_; }
  const PoolDiagnostics& diagnostics() const noexcept { return diagnostics_; }
  std::size_t days() const noexcept { return sampler_.days(); }

 private:
  ExpertPoolConfig config_;
  NeighborSampler sampler_;
  std::unique_ptr<WorkerPool> workers_;
  std::vector<TransformedVector> transformed_;  // by sample id
  std::vector<WeightedIds> matched_;
  std::vector<SaddleTriple> previous_;
  std::vector<char> has_previous_;
  std::vector<SolverDiagnostics> last_;
  std::vector<char> solved_;
  std::size_t n_assets_ = 0;
  PoolDiagnostics diagnostics_;
};

}  // namespace cann
