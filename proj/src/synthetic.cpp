#include "cann/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "cann/error.hpp"
#include "cann/risk_cvar.hpp"
#include "cann/sample_set.hpp"

namespace cann {

namespace {

void validate_asset_law(const AssetLaw& a, double bound, const std::string& path) {
  if (a.points.empty() || a.points.size() != a.probs.size())
    throw ConfigError(path, "points and probs must be nonempty and of equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (!(a.points[i] >= 1.0 - bound - 1e-12 && a.points[i] <= 1.0 + bound + 1e-12))
      throw ConfigError(path + "/points/" + std::to_string(i), "outside [1-B, 1+B]");
    if (!(a.probs[i] >= 0.0)) throw ConfigError(path + "/probs/" + std::to_string(i), "negative");
    total += a.probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError(path + "/probs", "must sum to 1");
}

// Wielandt: a primitive S x S matrix has P^((S-1)^2 + 1) > 0 entrywise.
bool primitive(const std::vector<std::vector<double>>& p) {
  const std::size_t s = p.size();
  std::vector<std::vector<char>> pattern(s, std::vector<char>(s));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) pattern[i][j] = p[i][j] > 0.0;
  auto power = pattern;
  const std::size_t steps = (s - 1) * (s - 1) + 1;
  for (std::size_t k = 1; k < steps; ++k) {
    std::vector<std::vector<char>> next(s, std::vector<char>(s, 0));
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t m = 0; m < s; ++m)
        if (power[i][m])
          for (std::size_t j = 0; j < s; ++j) next[i][j] |= pattern[m][j];
    power = std::move(next);
  }
  for (const auto& row : power)
    for (char v : row)
      if (!v) return false;
  return true;
}

std::discrete_distribution<std::size_t> make_picker(const std::vector<double>& probs) {
  return std::discrete_distribution<std::size_t>(probs.begin(), probs.end());
}

}  // namespace

void MarkovMarketSpec::validate(double bound) const {
  const std::size_t s = states();
  if (s == 0) throw ConfigError("/transition", "needs at least one state");
  if (emissions.size() != s) throw ConfigError("/states", "needs one emission law per state");
  for (std::size_t i = 0; i < s; ++i) {
    const std::string row = "/transition/" + std::to_string(i);
    if (transition[i].size() != s) throw ConfigError(row, "row length differs from state count");
    double total = 0.0;
    for (double v : transition[i]) {
      if (!(v >= 0.0)) throw ConfigError(row, "negative transition probability");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError(row, "row must sum to 1");
  }
  const std::size_t n = assets();
  if (n == 0) throw ConfigError("/states/0/assets", "needs at least one asset");
  for (std::size_t i = 0; i < s; ++i) {
    if (emissions[i].size() != n)
      throw ConfigError("/states/" + std::to_string(i) + "/assets", "asset count differs across states");
    for (std::size_t a = 0; a < n; ++a)
      validate_asset_law(emissions[i][a], bound,
                         "/states/" + std::to_string(i) + "/assets/" + std::to_string(a));
  }
  if (!primitive(transition))
    throw ConfigError("/transition", "chain must be irreducible and aperiodic");
  if (!(jitter >= 0.0)) throw ConfigError("/jitter", "must be >= 0");
}

std::vector<MarketVector> gen_iid(const IidLaw& law, std::size_t days, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::discrete_distribution<std::size_t>> pickers;
  for (const auto& a : law) pickers.push_back(make_picker(a.probs));
  std::vector<MarketVector> out(days);
  for (auto& x : out) {
    x.x.resize(law.size());
    for (std::size_t a = 0; a < law.size(); ++a) x.x[a] = law[a].points[pickers[a](rng)];
  }
  return out;
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition) {
  const auto s = static_cast<Eigen::Index>(transition.size());
  Eigen::MatrixXd pt(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      pt(j, i) = transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::EigenSolver<Eigen::MatrixXd> es(pt);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < s; ++i)
    if (std::abs(es.eigenvalues()(i) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = i;
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  v /= v.sum();
  std::vector<double> pi(v.data(), v.data() + s);
  for (double& p : pi) p = std::max(p, 0.0);
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& p : pi) p /= total;
  return pi;
}

MarkovPath gen_markov(const MarkovMarketSpec& spec, std::size_t days, double bound) {
  spec.validate(bound);
  std::mt19937_64 rng(spec.seed);
  const std::vector<double> pi = stationary_distribution(spec.transition);
  std::vector<std::discrete_distribution<std::size_t>> rows;
  for (const auto& r : spec.transition) rows.push_back(make_picker(r));
  std::vector<std::vector<std::discrete_distribution<std::size_t>>> emit(spec.states());
  for (std::size_t s = 0; s < spec.states(); ++s)
    for (const auto& a : spec.emissions[s]) emit[s].push_back(make_picker(a.probs));
  std::uniform_real_distribution<double> noise(-0.5 * spec.jitter, 0.5 * spec.jitter);

  MarkovPath path;
  path.states.reserve(days + 1);
  auto initial = make_picker(pi);
  path.states.push_back(initial(rng));
  path.markets.resize(days);
  const std::size_t n = spec.assets();
  for (std::size_t t = 0; t < days; ++t) {
    const std::size_t s = rows[path.states.back()](rng);
    path.states.push_back(s);
    MarketVector& x = path.markets[t];
    x.x.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      x.x[a] = spec.emissions[s][a].points[emit[s][a](rng)];
      if (spec.jitter > 0.0) x.x[a] += noise(rng);
    }
    clip_to_bound(x, bound);
  }
  return path;
}

DiscreteLaw product_law(const IidLaw& law) {
  DiscreteLaw out;
  out.points.push_back(MarketVector{});
  out.probs.push_back(1.0);
  for (const auto& a : law) {
    DiscreteLaw next;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      for (std::size_t j = 0; j < a.points.size(); ++j) {
        if (a.probs[j] == 0.0) continue;
        MarketVector x = out.points[i];
        x.x.push_back(a.points[j]);
        next.points.push_back(std::move(x));
        next.probs.push_back(out.probs[i] * a.probs[j]);
      }
    }
    out = std::move(next);
  }
  return out;
}

DiscreteLaw conditional_law(const MarkovMarketSpec& spec, std::size_t state) {
  DiscreteLaw out;
  for (std::size_t s = 0; s < spec.states(); ++s) {
    const double p = spec.transition.at(state)[s];
    if (p == 0.0) continue;
    DiscreteLaw emit = product_law(spec.emissions[s]);
    for (std::size_t i = 0; i < emit.points.size(); ++i) {
      out.points.push_back(std::move(emit.points[i]));
      out.probs.push_back(p * emit.probs[i]);
    }
  }
  return out;
}

namespace {

std::vector<double> law_losses(const Portfolio& b, const DiscreteLaw& law,
                               const MarketConfig& market) {
  std::vector<double> losses;
  losses.reserve(law.points.size());
  for (const auto& x : law.points) losses.push_back(omega(b, transform(x, market.rate), market));
  return losses;
}

}  // namespace

double expected_loss(const Portfolio& b, const DiscreteLaw& law, const MarketConfig& market) {
  const std::vector<double> losses = law_losses(b, law, market);
  double m = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) m += law.probs[i] * losses[i];
  return m;
}

double conditional_cvar(const Portfolio& b, const DiscreteLaw& law, double alpha,
                        const MarketConfig& market) {
  return cvar_tail_oracle(law_losses(b, law, market), law.probs, alpha);
}

TrueOptimum true_optimum(const MarkovMarketSpec& spec, const MarketConfig& market,
                         const RiskConfig& risk, double reg) {
  TrueOptimum out;
  out.stationary = stationary_distribution(spec.transition);
  const std::size_t dim = 2 * spec.assets() + 1;
  SolverParams params;
  params.tol = 1e-9;
  params.max_iters = 20000;
  for (std::size_t s = 0; s < spec.states(); ++s) {
    const DiscreteLaw law = conditional_law(spec, s);
    SampleSet samples(dim);
    for (std::size_t i = 0; i < law.points.size(); ++i)
      samples.add(transform(law.points[i], market.rate).x, law.probs[i]);
    samples.finalize();
    StateOptimum st;
    const SaddleResult r = solve_saddle(samples, SaddleSpec::make(market, risk, reg), params);
    st.triple = r.triple;
    st.value = expected_loss(st.triple.portfolio, law, market);
    st.cvar = conditional_cvar(st.triple.portfolio, law, risk.alpha, market);
    // With lambda capped, an infeasible budget shows up as a violated constraint.
    st.feasible = st.cvar <= risk.gamma + 1e-6;
    out.feasible = out.feasible && st.feasible;
    out.value += out.stationary[s] * st.value;
    out.per_state.push_back(std::move(st));
  }
  return out;
}

}  // namespace cann
