#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cann/simplex.hpp"

using namespace cann;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Bisection on the threshold tau with sum (y - tau)^+ = mass.
std::vector<double> bisection_projection(const std::vector<double>& y, double mass) {
  double lo = *std::min_element(y.begin(), y.end()) - mass;
  double hi = *std::max_element(y.begin(), y.end());
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double v : y) s += std::max(v - mid, 0.0);
    (s > mass ? lo : hi) = mid;
  }
  std::vector<double> x;
  for (double v : y) x.push_back(std::max(v - 0.5 * (lo + hi), 0.0));
  return x;
}

}  // namespace

TEST_CASE("Euclidean projection") {
  SUBCASE("points already on the simplex are fixed") {
    std::vector<double> y{0.2, 0.5, 0.3};
    project_onto_simplex(y, 1.0);
    CHECK(y[0] == doctest::Approx(0.2));
    CHECK(y[1] == doctest::Approx(0.5));
    CHECK(y[2] == doctest::Approx(0.3));
  }
  SUBCASE("hand example") {
    std::vector<double> y{2.0, 0.0};
    project_onto_simplex(y, 1.0);
    CHECK(y[0] == doctest::Approx(1.0));
    CHECK(y[1] == doctest::Approx(0.0));
    std::vector<double> z{0.0, 0.0, 0.0};
    project_onto_simplex(z, 3.0);
    for (double v : z) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("random points against bisection") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<double> y(1 + trial % 23);
      for (double& v : y) v = g(rng);
      const double mass = 0.5 + (trial % 5);
      auto x = y;
      project_onto_simplex(x, mass);
      const auto oracle = bisection_projection(y, mass);
      CHECK(sum(x) == doctest::Approx(mass).epsilon(1e-12));
      for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(x[i] >= 0.0);
        CHECK(std::abs(x[i] - oracle[i]) <= 1e-10);
      }
      auto again = x;
      project_onto_simplex(again, mass);
      for (std::size_t i = 0; i < y.size(); ++i) CHECK(again[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("projection in a quadratic norm") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> m(n * n), a(n * n, 0.0), y(n);
    for (double& v : m) v = g(rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) a[i * n + j] += m[k * n + i] * m[k * n + j];
        if (i == j) a[i * n + j] += 0.5;
      }
    for (double& v : y) v = g(rng);
    const auto x = project_onto_simplex_in_norm(y, a);
    CHECK(sum(x) == doctest::Approx(1.0).epsilon(1e-10));
    // Optimality: no simplex vertex is a descent direction.
    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) grad[i] += 2.0 * a[i * n + j] * (x[j] - y[j]);
    double gx = 0.0;
    for (std::size_t i = 0; i < n; ++i) gx += grad[i] * x[i];
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(x[j] >= 0.0);
      CHECK(grad[j] - gx >= -1e-6);
    }
  }
  SUBCASE("identity norm is the Euclidean projection") {
    std::vector<double> y{0.9, -0.4, 0.7, 0.1}, eye(16, 0.0);
    for (int i = 0; i < 4; ++i) eye[i * 5] = 1.0;
    const auto x = project_onto_simplex_in_norm(y, eye);
    project_onto_simplex(y, 1.0);
    for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-8));
  }
}
