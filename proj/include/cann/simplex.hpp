#pragma once

#include <span>
#include <vector>

namespace cann {

/// Euclidean projection of y onto {b >= 0, sum b = mass}, in place.
/// Sort-based threshold search, O(d log d).
void project_onto_simplex(std::span<double> y, double mass);

/// Minimises (b - y)^T A (b - y) over the unit-mass simplex by accelerated
/// projected gradient. A is dense, row-major, symmetric positive definite.
std::vector<double> project_onto_simplex_in_norm(std::span<const double> y,
                                                 std::span<const double> a_rowmajor,
                                                 double tol = 1e-12, int max_iters = 20000);

}  // namespace cann
