#include "cann/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cann/error.hpp"
#include "cann/risk_cvar.hpp"

namespace cann {

Summary summarize(std::span<const double> returns, double alpha) {
  if (returns.empty()) throw DataError("no daily returns to summarise");
  Summary s;
  s.days = returns.size();
  std::vector<double> losses(returns.size());
  double log_sum = 0.0, sum = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    if (!(returns[t] > 0.0))
      throw DataError("day " + std::to_string(t + 1) + ": non-positive daily return " +
                      std::to_string(returns[t]));
    losses[t] = -std::log(returns[t]);
    log_sum -= losses[t];
    sum += returns[t];
  }
  s.growth_rate = log_sum / static_cast<double>(s.days);
  s.terminal_wealth = std::exp(log_sum);
  s.cvar = cvar_tail_oracle(losses, alpha);
  s.max_drawdown = max_drawdown(returns);
  s.mean_return = sum / static_cast<double>(s.days) - 1.0;
  return s;
}

std::vector<double> wealth_path(std::span<const double> returns) {
  std::vector<double> w(returns.size());
  double log_w = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    log_w += std::log(returns[t]);
    w[t] = std::exp(log_w);
  }
  return w;
}

double max_drawdown(std::span<const double> returns) {
  double log_w = 0.0, peak = 0.0, worst = 0.0;
  for (double r : returns) {
    log_w += std::log(r);
    peak = std::max(peak, log_w);
    worst = std::max(worst, peak - log_w);
  }
  return 1.0 - std::exp(-worst);
}

std::vector<double> trailing_cvar(std::span<const double> losses, double alpha,
                                  std::size_t window) {
  if (window == 0) throw ConfigError("/output/cvar_window", "must be >= 1");
  std::vector<double> out(losses.size());
  for (std::size_t t = 0; t < losses.size(); ++t) {
    const std::size_t start = t + 1 > window ? t + 1 - window : 0;
    out[t] = cvar_tail_oracle(losses.subspan(start, t + 1 - start), alpha);
  }
  return out;
}

}  // namespace cann
