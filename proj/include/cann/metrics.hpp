#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cann {

struct Summary {
  std::size_t days = 0;
  double growth_rate = 0.0;     // W_T: mean log return
  double terminal_wealth = 0.0; // R_T = exp(T W_T)
  double cvar = 0.0;            // CVaR_alpha of -log returns
  double max_drawdown = 0.0;    // largest peak-to-trough loss of wealth, as a fraction
  double mean_return = 0.0;     // arithmetic mean of returns - 1
};

/// Throws DataError naming the first non-positive day (1-based).
Summary summarize(std::span<const double> returns, double alpha);

/// Wealth path R_1..R_T from daily returns.
std::vector<double> wealth_path(std::span<const double> returns);

double max_drawdown(std::span<const double> returns);

/// CVaR_alpha of the trailing `window` losses ending at each day (fewer at
/// the start).
std::vector<double> trailing_cvar(std::span<const double> losses, double alpha, std::size_t window);

}  // namespace cann
