#include "cann/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "cann/error.hpp"
#include "cann/log_optimal.hpp"
#include "cann/objective.hpp"
#include "cann/parallel.hpp"
#include "cann/saddle_solver.hpp"
#include "cann/simd/kernels.hpp"
#include "cann/simplex.hpp"

namespace cann {

namespace {

std::size_t asset_count(std::span<const MarketVector> markets) {
  if (markets.empty()) throw DataError("benchmark needs at least one market day");
  return markets.front().size();
}

double growth(std::span<const double> b, const MarketVector& x) {
  return simd::dot(b, x.x);
}

}  // namespace

std::vector<double> bcrp(std::span<const MarketVector> markets, double tol) {
  const SampleSet samples = SampleSet::uniform(markets);
  LogOptimalParams p;
  p.tol = tol;
  (void)asset_count(markets);
  return log_optimal(samples, p).b;
}

std::vector<double> crp_returns(std::span<const MarketVector> markets, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(markets.size());
  for (const auto& x : markets) out.push_back(growth(b, x));
  return out;
}

std::vector<double> eg_step(std::span<const double> b, const MarketVector& x, double eta) {
  const double r = growth(b, x);
  std::vector<double> next(b.size());
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) total += (next[i] = b[i] * std::exp(eta * x[i] / r));
  for (double& v : next) v /= total;
  return next;
}

std::vector<double> eg_run(std::span<const MarketVector> markets, double eta) {
  const std::size_t n = asset_count(markets);
  std::vector<double> b(n, 1.0 / static_cast<double>(n));
  std::vector<double> out;
  out.reserve(markets.size());
  for (const auto& x : markets) {
    out.push_back(growth(b, x));
    b = eg_step(b, x, eta);
  }
  return out;
}

Ons::Ons(std::size_t n, double eta, double beta, double delta)
    : n_(n), eta_(eta), beta_(beta), delta_(delta), a_(n * n, 0.0), b_hat_(n, 0.0),
      b_(n, 1.0 / static_cast<double>(n)) {
  for (std::size_t i = 0; i < n; ++i) a_[i * n + i] = 1.0;
}

void Ons::update(const MarketVector& x) {
  const double r = growth(b_, x);
  std::vector<double> grad(n_);
  for (std::size_t i = 0; i < n_; ++i) grad[i] = x[i] / r;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) a_[i * n_ + j] += grad[i] * grad[j];
    b_hat_[i] += (1.0 + 1.0 / beta_) * grad[i];
  }
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
      a_.data(), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  const Eigen::Map<const Eigen::VectorXd> bh(b_hat_.data(), static_cast<Eigen::Index>(n_));
  const Eigen::VectorXd p = delta_ * a.ldlt().solve(bh);
  std::vector<double> target(p.data(), p.data() + n_);
  b_ = project_onto_simplex_in_norm(target, a_);
  for (double& v : b_) v = (1.0 - eta_) * v + eta_ / static_cast<double>(n_);
}

std::vector<double> ons_run(std::span<const MarketVector> markets, double eta, double beta,
                            double delta) {
  Ons ons(asset_count(markets), eta, beta, delta);
  std::vector<double> out;
  out.reserve(markets.size());
  for (const auto& x : markets) {
    out.push_back(growth(ons.portfolio(), x));
    ons.update(x);
  }
  return out;
}

std::vector<double> up_approx(std::span<const MarketVector> markets, std::size_t samples,
                              std::uint64_t seed) {
  const std::size_t n = asset_count(markets);
  if (samples == 0) throw ConfigError("/strategies/up/samples", "must be >= 1");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> crps(samples * n);
  for (std::size_t s = 0; s < samples; ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += (crps[s * n + i] = expo(rng));
    for (std::size_t i = 0; i < n; ++i) crps[s * n + i] /= total;
  }
  // Wealth is kept relative to the running maximum to stay in range.
  std::vector<double> wealth(samples, 1.0);
  std::vector<double> out;
  out.reserve(markets.size());
  for (const auto& x : markets) {
    double before = 0.0, after = 0.0, top = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const double g = growth(std::span<const double>(crps).subspan(s * n, n), x);
      before += wealth[s];
      wealth[s] *= g;
      after += wealth[s];
      top = std::max(top, wealth[s]);
    }
    out.push_back(after / before);
    for (double& w : wealth) w /= top;
  }
  return out;
}

namespace {

struct NnSetup {
  bool leveraged = false;
  MarketConfig market;
  std::size_t dim = 0;
  double mass = 1.0;
  double offset = 0.0;
};

// Drives the nearest-neighbour experts over a sequence; `per_day` sees the
// expert portfolios for each day before the day is revealed.
template <typename Fn>
void nn_drive(std::span<const MarketVector> markets, const NearestNeighborConfig& config,
              const NnSetup& setup, Fn&& per_day) {
  const std::size_t n_experts = config.grid.size();
  NeighborSampler sampler(config.grid, config.merge_quantum);
  WorkerPool pool(std::max<std::size_t>(1, config.workers));
  std::vector<std::vector<double>> rows;  // by sample id, as fed to the solver
  std::vector<WeightedIds> matched;
  std::vector<std::vector<double>> portfolios(n_experts,
                                              std::vector<double>(setup.dim, setup.mass / static_cast<double>(setup.dim)));
  std::vector<char> has_previous(n_experts, 0);
  for (std::size_t t = 0; t <= markets.size(); ++t) {
    if (t > 0) {
      sampler.matched(matched);
      pool.for_each(n_experts, [&](std::size_t e) {
        const WeightedIds& set = matched[e];
        if (set.empty()) {
          std::fill(portfolios[e].begin(), portfolios[e].end(),
                    setup.mass / static_cast<double>(setup.dim));
          has_previous[e] = 0;
          return;
        }
        SampleSet samples(setup.dim);
        for (std::size_t j = 0; j < set.ids.size(); ++j) samples.add(rows[set.ids[j]], set.counts[j]);
        samples.finalize();
        LogOptimalParams p;
        p.mass = setup.mass;
        p.offset = setup.offset;
        if (setup.leveraged && config.regularize) {
          const ExpertId id = config.grid.id(e);
          p.ridge = config.regularizer_scale * expert_regularizer(t, id.h, id.k);
        }
        std::span<const double> warm;
        if (has_previous[e]) warm = portfolios[e];
        portfolios[e] = log_optimal(samples, p, warm).b;
        has_previous[e] = 1;
      });
    }
    if (t == markets.size()) {
      per_day(t, portfolios);
      break;
    }
    per_day(t, portfolios);
    sampler.append(markets[t]);
    while (rows.size() < sampler.distinct()) {
      const MarketVector& rep = sampler.representative(static_cast<std::uint32_t>(rows.size()));
      rows.push_back(setup.leveraged ? transform(rep, setup.market.rate).x : rep.x);
    }
  }
}

std::vector<double> nn_run(std::span<const MarketVector> markets,
                           const NearestNeighborConfig& config, const NnSetup& setup) {
  const std::size_t n_experts = config.grid.size();
  std::vector<double> log_wealth(n_experts, 0.0);
  const double log_prior = -std::log(static_cast<double>(n_experts));
  std::vector<double> out;
  out.reserve(markets.size());
  nn_drive(markets, config, setup,
           [&](std::size_t t, const std::vector<std::vector<double>>& portfolios) {
             if (t == markets.size()) return;
             double top = -std::numeric_limits<double>::infinity();
             for (double lw : log_wealth) top = std::max(top, lw + log_prior);
             std::vector<double> b(setup.dim, 0.0);
             double total = 0.0;
             for (std::size_t e = 0; e < n_experts; ++e) {
               const double w = std::exp(log_wealth[e] + log_prior - top);
               total += w;
               for (std::size_t j = 0; j < setup.dim; ++j) b[j] += w * portfolios[e][j];
             }
             for (double& v : b) v /= total;
             const std::vector<double> x =
                 setup.leveraged ? transform(markets[t], setup.market.rate).x : markets[t].x;
             out.push_back(simd::dot(b, x) - setup.offset);
             for (std::size_t e = 0; e < n_experts; ++e)
               log_wealth[e] += std::log(simd::dot(portfolios[e], x) - setup.offset);
           });
  return out;
}

NnSetup leveraged_setup(std::size_t n, const MarketConfig& market) {
  NnSetup s;
  s.leveraged = true;
  s.market = market;
  s.dim = 2 * n + 1;
  s.mass = market.leverage;
  s.offset = market.offset();
  return s;
}

}  // namespace

std::vector<double> bnn_run(std::span<const MarketVector> markets,
                            const NearestNeighborConfig& config) {
  NnSetup setup;
  setup.dim = asset_count(markets);
  return nn_run(markets, config, setup);
}

std::vector<double> bnn_leveraged_run(std::span<const MarketVector> markets,
                                      const NearestNeighborConfig& config,
                                      const MarketConfig& market) {
  return nn_run(markets, config, leveraged_setup(asset_count(markets), market));
}

std::vector<std::vector<double>> bnn_leveraged_experts(std::span<const MarketVector> history,
                                                       const NearestNeighborConfig& config,
                                                       const MarketConfig& market) {
  std::vector<std::vector<double>> last;
  nn_drive(history, config, leveraged_setup(asset_count(history), market),
           [&](std::size_t t, const std::vector<std::vector<double>>& portfolios) {
             if (t == history.size()) last = portfolios;
           });
  return last;
}

}  // namespace cann
