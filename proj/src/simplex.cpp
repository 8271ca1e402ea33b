#include "cann/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "cann/error.hpp"

namespace cann {

void project_onto_simplex(std::span<double> y, double mass) {
  if (y.empty()) throw Error("projection of an empty vector");
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - mass) / static_cast<double>(i + 1);
    if (i + 1 == sorted.size() || sorted[i + 1] <= candidate) {
      threshold = candidate;
      break;
    }
  }
  for (double& v : y) v = std::max(v - threshold, 0.0);
}

std::vector<double> project_onto_simplex_in_norm(std::span<const double> y,
                                                 std::span<const double> a, double tol,
                                                 int max_iters) {
  const std::size_t n = y.size();
  if (a.size() != n * n) throw Error("norm matrix has the wrong shape");
  // Gershgorin bound on the largest eigenvalue gives a safe step.
  double lipschitz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a[i * n + j]);
    lipschitz = std::max(lipschitz, row);
  }
  const double step = 1.0 / (2.0 * lipschitz);

  std::vector<double> x(n, 1.0 / static_cast<double>(n)), z = x, prev = x, grad(n);
  double momentum = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    // gradient of (b - y)^T A (b - y) is 2 A (b - y)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * (z[j] - y[j]);
      grad[i] = 2.0 * s;
    }
    prev = x;
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i] - step * grad[i];
    project_onto_simplex(x, 1.0);
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = x[i] + ((momentum - 1.0) / next) * (x[i] - prev[i]);
      moved = std::max(moved, std::abs(x[i] - prev[i]));
    }
    momentum = next;
    if (moved < tol) break;
  }
  return x;
}

}  // namespace cann
