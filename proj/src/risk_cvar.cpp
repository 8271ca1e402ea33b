#include "cann/risk_cvar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cann/error.hpp"

namespace cann {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("CVaR level alpha must lie in (0, 1)");
}

void check_sample(std::span<const double> losses, std::span<const double> probs) {
  if (losses.empty()) throw Error("CVaR of an empty loss sample");
  if (losses.size() != probs.size()) throw Error("loss and probability vectors differ in length");
}

// Indices of `losses` ordered from the largest loss down.
std::vector<std::size_t> descending_order(std::span<const double> losses) {
  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
  return order;
}

}  // namespace

double cvar_tail_oracle(std::span<const double> losses, double alpha) {
  check_alpha(alpha);
  if (losses.empty()) throw Error("CVaR of an empty loss sample");
  std::vector<double> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double tail = (1.0 - alpha) * static_cast<double>(sorted.size());
  const auto whole = static_cast<std::size_t>(std::floor(tail));
  double sum = 0.0;
  for (std::size_t i = 0; i < whole && i < sorted.size(); ++i) sum += sorted[i];
  const double frac = tail - static_cast<double>(whole);
  if (frac > 0.0 && whole < sorted.size()) sum += frac * sorted[whole];
  return sum / tail;
}

double cvar_tail_oracle(std::span<const double> losses, std::span<const double> probs,
                        double alpha) {
  check_alpha(alpha);
  check_sample(losses, probs);
  const double tail = 1.0 - alpha;
  double remaining = tail;
  double sum = 0.0;
  for (std::size_t i : descending_order(losses)) {
    if (remaining <= 0.0) break;
    const double take = std::min(probs[i], remaining);
    sum += take * losses[i];
    remaining -= take;
  }
  return sum / tail;
}

double ru_objective(std::span<const double> losses, double c, double alpha) {
  check_alpha(alpha);
  double excess = 0.0;
  for (double l : losses) excess += l > c ? l - c : 0.0;
  return c + excess / (static_cast<double>(losses.size()) * (1.0 - alpha));
}

double ru_objective(std::span<const double> losses, std::span<const double> probs, double c,
                    double alpha) {
  check_alpha(alpha);
  check_sample(losses, probs);
  double excess = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i)
    excess += losses[i] > c ? probs[i] * (losses[i] - c) : 0.0;
  return c + excess / (1.0 - alpha);
}

CvarResult cvar_ru_minimize(std::span<const double> losses, std::span<const double> probs,
                            double alpha, double bound_m) {
  check_alpha(alpha);
  check_sample(losses, probs);
  const double scale = 1.0 / (1.0 - alpha);
  const auto order = descending_order(losses);

  // Walking breakpoints from the top: at c = l_(j), the plus-part is active for
  // the strictly larger losses already passed.
  CvarResult best{std::numeric_limits<double>::infinity(), 0.0};
  double mass_above = 0.0, weighted_above = 0.0;
  std::size_t j = 0;
  while (j < order.size()) {
    const double c = std::clamp(losses[order[j]], -bound_m, bound_m);
    const double value = c + scale * (weighted_above - mass_above * c);
    // <= keeps the smallest minimiser, i.e. the alpha-quantile.
    if (value <= best.value) best = {value, c};
    // Absorb every tied loss before moving on.
    const double level = losses[order[j]];
    while (j < order.size() && losses[order[j]] == level) {
      mass_above += probs[order[j]];
      weighted_above += probs[order[j]] * losses[order[j]];
      ++j;
    }
  }
  return best;
}

CvarResult cvar_ru_minimize(std::span<const double> losses, double alpha, double bound_m) {
  const std::vector<double> probs(losses.size(), 1.0 / static_cast<double>(losses.size()));
  return cvar_ru_minimize(losses, probs, alpha, bound_m);
}

double phi_empirical(const Portfolio& b, double c, std::span<const TransformedVector> samples,
                     double alpha, const MarketConfig& market) {
  if (samples.empty()) throw Error("phi over an empty sample set");
  std::vector<double> losses;
  losses.reserve(samples.size());
  for (const auto& x : samples) losses.push_back(omega(b, x, market));
  return ru_objective(losses, c, alpha);
}

CvarResult cvar_ru_minimize(const Portfolio& b, std::span<const TransformedVector> samples,
                            double alpha, double bound_m, const MarketConfig& market) {
  if (samples.empty()) throw Error("CVaR over an empty sample set");
  std::vector<double> losses;
  losses.reserve(samples.size());
  for (const auto& x : samples) losses.push_back(omega(b, x, market));
  return cvar_ru_minimize(losses, alpha, bound_m);
}

}  // namespace cann
