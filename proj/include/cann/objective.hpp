#pragma once

// Loss, instantaneous Lagrangian and the constants that bound them. Every
// other module evaluates portfolios through these functions.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cann/market_data.hpp"

namespace cann {

/// Nonnegative allocation over the 2n+1 transformed instruments with total
/// mass L (the leverage). Index 0 is cash.
struct Portfolio {
  std::vector<double> b;

  static Portfolio all_cash(std::size_t dim, double mass);
  static Portfolio uniform(std::size_t dim, double mass);

  std::size_t size() const noexcept { return b.size(); }
  double mass() const noexcept;
  bool feasible(double mass, double tol = 1e-9) const noexcept;
  std::span<const double> view() const noexcept { return b; }
};

/// A joint decision (b, c, lambda): portfolio, CVaR threshold and multiplier.
struct SaddleTriple {
  Portfolio portfolio;
  double c = 0.0;
  double lambda = 0.0;
};

struct RiskConfig {
  double alpha = 0.95;       // CVaR level
  double gamma = 0.05;       // risk budget on the conditional CVaR of the loss
  double bound_m = 1.0;      // M: every loss lies in [-M, M]
  double lambda_max = 1.0;   // multipliers live in [0, lambda_max]

  double tail_scale() const noexcept { return 1.0 / (1.0 - alpha); }
  void validate() const;
};

/// <b, x'> - (L-1)(1+r).
double daily_return(std::span<const double> b, std::span<const double> xt, double offset);
inline double daily_return(const Portfolio& b, const TransformedVector& xt, const MarketConfig& m) {
  return daily_return(b.view(), xt.view(), m.offset());
}

/// omega = -log(daily return). Throws DomainError if the return is not positive.
double omega(std::span<const double> b, std::span<const double> xt, double offset);
inline double omega(const Portfolio& b, const TransformedVector& xt, const MarketConfig& m) {
  return omega(b.view(), xt.view(), m.offset());
}

/// l = w + lambda (c + (w - c)^+ / (1-alpha) - gamma), given w = omega(b, x').
double lagrangian_from_loss(double loss, double c, double lambda, const RiskConfig& risk) noexcept;

double inst_lagrangian(const SaddleTriple& t, std::span<const double> xt, double offset,
                       const RiskConfig& risk);
inline double inst_lagrangian(const SaddleTriple& t, const TransformedVector& xt,
                              const MarketConfig& m, const RiskConfig& risk) {
  return inst_lagrangian(t, xt.view(), m.offset(), risk);
}

/// A subgradient of the instantaneous Lagrangian. At the kink omega == c the
/// plus-part contributes zero.
struct LagrangianGradient {
  std::vector<double> d_b;
  double d_c = 0.0;
  double d_lambda = 0.0;
};
LagrangianGradient inst_lagrangian_subgradient(const SaddleTriple& t, std::span<const double> xt,
                                               double offset, const RiskConfig& risk);

/// Range of the daily return over clipped markets and feasible portfolios:
/// [1 + r - L(B + r), 1 + r + L B].
struct ReturnRange {
  double lo;
  double hi;
};
ReturnRange return_range(const MarketConfig& m);

/// M = max |log(return)| over the return range. Throws ConfigError when the
/// leverage admits non-positive returns.
double compute_m(const MarketConfig& m);

/// lambda_max = 2M / slack with slack in (0, gamma); the default slack is gamma/2.
double compute_lambda_max(double bound_m, double gamma, std::optional<double> slack = std::nullopt);

RiskConfig make_risk_config(const MarketConfig& m, double alpha, double gamma,
                            std::optional<double> slack = std::nullopt);

}  // namespace cann
