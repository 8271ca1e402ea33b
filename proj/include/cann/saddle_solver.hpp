#pragma once

// Saddle point of the mean regularized Lagrangian
//   F(b, c, lambda) = E_w[ l(b, c, lambda, X) ] + reg (|b|^2 + c^2 - lambda^2)
// over the L-simplex x [-M, M] x [0, lambda_max], for a weighted sample of
// transformed market vectors.

#include <span>
#include <string>

#include "cann/objective.hpp"
#include "cann/sample_set.hpp"

namespace cann {

enum class SolverMethod {
  newton,  // smoothed interior-point Newton on the KKT system (default)
  pgda,    // alternating projected subgradient descent-ascent
};

SolverMethod parse_solver_method(const std::string& name);
std::string solver_method_name(SolverMethod m);

struct SolverParams {
  SolverMethod method = SolverMethod::newton;
  double tol = 1e-6;
  int max_iters = 5000;
  double merge_quantum = 0.0;  // see NeighborSampler
  double regularizer_scale = 1.0;  // multiplies the expert regularizer weight
  void validate() const;
};

/// Everything except the sample that defines the problem.
struct SaddleSpec {
  double offset = 0.0;  // (L-1)(1+r)
  double mass = 1.0;    // L
  RiskConfig risk;
  double reg = 0.0;

  static SaddleSpec make(const MarketConfig& market, const RiskConfig& risk, double reg);
};

struct SolverDiagnostics {
  int iterations = 0;
  double residual = 0.0;  // KKT residual of the last accepted iterate
  bool converged = false;
};

struct SaddleResult {
  SaddleTriple triple;
  SolverDiagnostics diagnostics;
};

/// Expert regularizer weight 1/t + 1/h + 1/k.
double expert_regularizer(std::size_t t, int h, int k);

/// l(b, c, lambda, x') + reg (|(b, c)|^2 - lambda^2).
double regularized_loss(const SaddleTriple& t, std::span<const double> xt, double offset,
                        const RiskConfig& risk, double reg);

/// F at the given triple.
double mean_regularized_loss(const SaddleTriple& t, const SampleSet& samples,
                             const SaddleSpec& spec);

/// max over lambda of F(b, c, .), in closed form.
struct PrimalValue {
  double value;
  double lambda;
};
PrimalValue primal_value(const Portfolio& b, double c, const SampleSet& samples,
                         const SaddleSpec& spec);

/// Certified lower bound on min over (b, c) of F(., ., lambda), built from
/// strong convexity around (b, c).
double dual_lower_bound(const SaddleTriple& t, const SampleSet& samples, const SaddleSpec& spec);

/// primal_value(b, c) - dual_lower_bound(t); nonnegative, zero at the saddle.
double duality_gap(const SaddleTriple& t, const SampleSet& samples, const SaddleSpec& spec);

/// Requires a nonempty sample and spec.reg >= 0 (pgda needs reg > 0).
/// `warm` seeds the iteration; the result does not depend on it beyond the
/// tolerance. Never throws on non-convergence: the best iterate comes back
/// with diagnostics.converged = false.
SaddleResult solve_saddle(const SampleSet& samples, const SaddleSpec& spec,
                          const SolverParams& params, const SaddleTriple* warm = nullptr);

}  // namespace cann
