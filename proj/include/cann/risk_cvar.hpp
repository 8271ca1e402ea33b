#pragma once

// Conditional value at risk of a loss sample, computed two ways: by direct
// tail averaging and by minimising the Rockafellar-Uryasev function over the
// threshold c. The two must agree; tests hold them to 1e-8.

#include <span>

#include "cann/objective.hpp"

namespace cann {

struct CvarResult {
  double value = 0.0;   // CVaR_alpha
  double c_star = 0.0;  // minimising threshold (the alpha-quantile, VaR)
};

/// Mean of the worst (1-alpha) mass of the sample. With m = (1-alpha) * N the
/// top floor(m) losses count fully and the next one fractionally.
double cvar_tail_oracle(std::span<const double> losses, double alpha);

/// Same for a discrete distribution: `probs` are nonnegative and sum to 1.
double cvar_tail_oracle(std::span<const double> losses, std::span<const double> probs,
                        double alpha);

/// c + E[(loss - c)^+] / (1-alpha) for the empirical (or weighted) sample.
double ru_objective(std::span<const double> losses, double c, double alpha);
double ru_objective(std::span<const double> losses, std::span<const double> probs, double c,
                    double alpha);

/// Exact minimiser of ru_objective over c in [-M, M], found by scanning order
/// statistics (the minimum of a convex piecewise-linear function sits on a
/// breakpoint).
CvarResult cvar_ru_minimize(std::span<const double> losses, double alpha, double bound_m);
CvarResult cvar_ru_minimize(std::span<const double> losses, std::span<const double> probs,
                            double alpha, double bound_m);

/// phi(b, c) over a sample of transformed market vectors, with omega as the loss.
double phi_empirical(const Portfolio& b, double c, std::span<const TransformedVector> samples,
                     double alpha, const MarketConfig& market);

/// min_c phi(b, c): the empirical CVaR of portfolio b's loss.
CvarResult cvar_ru_minimize(const Portfolio& b, std::span<const TransformedVector> samples,
                            double alpha, double bound_m, const MarketConfig& market);

}  // namespace cann
