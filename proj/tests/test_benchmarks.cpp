#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cann/benchmarks.hpp"
#include "cann/error.hpp"
#include "cann/expert_pool.hpp"
#include "cann/log_optimal.hpp"

using namespace cann;

namespace {

double log_wealth(const std::vector<double>& returns) {
  double s = 0.0;
  for (double r : returns) s += std::log(r);
  return s;
}

std::vector<MarketVector> alternating(double up, double down, std::size_t days) {
  std::vector<MarketVector> m;
  for (std::size_t t = 0; t < days; ++t)
    m.push_back(t % 2 ? MarketVector{{down, up}} : MarketVector{{up, down}});
  return m;
}

std::vector<MarketVector> random_markets(std::mt19937_64& rng, std::size_t days, std::size_t n) {
  std::uniform_real_distribution<double> u(0.8, 1.25);
  std::vector<MarketVector> m(days);
  for (auto& x : m)
    for (std::size_t i = 0; i < n; ++i) x.x.push_back(u(rng));
  return m;
}

ExpertGrid tiny_grid(int k_max, int h_max) {
  ExpertGrid g;
  g.k_max = k_max;
  g.h_max = h_max;
  g.schedule = NeighborSchedule::standard(h_max);
  return g;
}

// argmax over s in [0, 1] of the mean log growth of (s, 1 - s), by golden section.
double two_asset_log_optimal(const std::vector<MarketVector>& m, const std::vector<double>& w) {
  auto f = [&](double s) {
    double v = 0.0;
    for (std::size_t t = 0; t < m.size(); ++t) v += w[t] * std::log(s * m[t][0] + (1 - s) * m[t][1]);
    return v;
  };
  double lo = 0.0, hi = 1.0;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    (f(a) < f(b) ? lo : hi) = (f(a) < f(b) ? a : b);
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("best constant rebalanced portfolio") {
  SUBCASE("anti-correlated alternation") {
    const auto b = bcrp(alternating(1.1, 0.9, 40));
    CHECK(b[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(b[1] == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("a dominating asset takes everything") {
    std::vector<MarketVector> m;
    for (int t = 0; t < 30; ++t) m.push_back(MarketVector{{1.02 + 0.01 * (t % 3), 0.99, 1.0}});
    const auto b = bcrp(m);
    CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("flat objective returns uniform") {
    const auto b = bcrp(std::vector<MarketVector>(10, MarketVector{{1.0, 1.0, 1.0}}));
    for (double v : b) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  }
  SUBCASE("beats every single asset and matches a one-dimensional search") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const auto m = random_markets(rng, 50, 2);
      const auto b = bcrp(m);
      CHECK(std::accumulate(b.begin(), b.end(), 0.0) == doctest::Approx(1.0));
      const double best = log_wealth(crp_returns(m, b));
      for (std::size_t i = 0; i < 2; ++i) {
        std::vector<double> vertex(2, 0.0);
        vertex[i] = 1.0;
        CHECK(best >= log_wealth(crp_returns(m, vertex)) - 1e-7);  // barrier accuracy
      }
      const double s = two_asset_log_optimal(m, std::vector<double>(m.size(), 1.0));
      CHECK(std::abs(b[0] - s) <= 1e-4);
    }
  }
}

TEST_CASE("exponentiated gradient") {
  const std::vector<double> half{0.5, 0.5};
  const auto b = eg_step(half, MarketVector{{1.1, 0.9}}, 0.05);
  const double a0 = 0.5 * std::exp(0.055), a1 = 0.5 * std::exp(0.045);
  CHECK(b[0] == doctest::Approx(a0 / (a0 + a1)));
  CHECK(b[1] == doctest::Approx(a1 / (a0 + a1)));
  const std::vector<double> skew{0.3, 0.7};
  CHECK(eg_step(skew, MarketVector{{1.0, 1.0}}, 0.05)[0] == doctest::Approx(0.3));
  CHECK(eg_step(skew, MarketVector{{1.3, 0.7}}, 0.0)[0] == doctest::Approx(0.3));
}

TEST_CASE("online Newton step") {
  SUBCASE("identity market keeps the uniform portfolio") {
    Ons ons(2);
    ons.update(MarketVector{{1.0, 1.0}});
    CHECK(ons.portfolio()[0] == doctest::Approx(0.5));
  }
  SUBCASE("two-day hand trace") {
    // n = 2, beta = 1, delta = 1/8, eta = 0. A = I + sum g g^T, p = delta A^-1 2 sum g,
    // and the A-norm projection onto {(s, 1-s)} is a clamped one-dimensional quadratic.
    Ons ons(2);
    double a[2][2] = {{1, 0}, {0, 1}}, gsum[2] = {0, 0}, b[2] = {0.5, 0.5};
    for (const MarketVector& x : {MarketVector{{1.2, 0.9}}, MarketVector{{0.8, 1.1}}}) {
      const double r = b[0] * x[0] + b[1] * x[1];
      const double g[2] = {x[0] / r, x[1] / r};
      for (int i = 0; i < 2; ++i) {
        gsum[i] += g[i];
        for (int j = 0; j < 2; ++j) a[i][j] += g[i] * g[j];
      }
      const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
      const double p0 = 0.125 * 2 * (a[1][1] * gsum[0] - a[0][1] * gsum[1]) / det;
      const double p1 = 0.125 * 2 * (-a[1][0] * gsum[0] + a[0][0] * gsum[1]) / det;
      // (b - p) = s u + v with u = (1, -1), v = (-p0, 1 - p1)
      const double u[2] = {1, -1}, v[2] = {-p0, 1 - p1};
      double uau = 0, uav = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          uau += u[i] * a[i][j] * u[j];
          uav += u[i] * a[i][j] * v[j];
        }
      const double s = std::clamp(-uav / uau, 0.0, 1.0);
      b[0] = s;
      b[1] = 1 - s;
      ons.update(x);
      CHECK(ons.portfolio()[0] == doctest::Approx(b[0]).epsilon(1e-8));
      CHECK(ons.portfolio()[1] == doctest::Approx(b[1]).epsilon(1e-8));
    }
  }
  SUBCASE("long run on an i.i.d. market approaches the distribution's optimum") {
    // A stock against a flat asset, two equally likely days; the optimum of the
    // law is s = 1/3.
    const std::vector<MarketVector> support{MarketVector{{1.3, 1.0}}, MarketVector{{0.75, 1.0}}};
    const double s = two_asset_log_optimal(support, {0.5, 0.5});
    CHECK(s == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    // With delta = 1/8 the iteration settles on a vertex of the simplex for
    // this law; delta = 1 is the follow-the-approximate-leader scaling.
    std::mt19937_64 rng(8);
    Ons ons(2, 0.0, 1.0, 1.0);
    for (int t = 0; t < 20000; ++t) ons.update(support[rng() % 2]);
    CHECK(std::abs(ons.portfolio()[0] - s) <= 0.05);
  }
}

TEST_CASE("universal portfolio") {
  SUBCASE("a single sample is a CRP") {
    std::mt19937_64 rng(2);
    const auto m = random_markets(rng, 20, 3);
    const auto up = up_approx(m, 1, 9);
    // The drawn CRP is unknown, but its returns are those of a fixed portfolio:
    // recover it from the first three days and check the rest.
    Eigen::Matrix3d x;
    Eigen::Vector3d r;
    for (int t = 0; t < 3; ++t) {
      for (int i = 0; i < 3; ++i) x(t, i) = m[t][i];
      r(t) = up[t];
    }
    const Eigen::Vector3d b = x.fullPivLu().solve(r);
    CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t t = 3; t < m.size(); ++t)
      CHECK(up[t] == doctest::Approx(b(0) * m[t][0] + b(1) * m[t][1] + b(2) * m[t][2]).epsilon(1e-9));
  }
  SUBCASE("constant markets") {
    for (double r : up_approx(std::vector<MarketVector>(15, MarketVector{{1.0, 1.0}}), 100, 1))
      CHECK(r == doctest::Approx(1.0));
  }
  SUBCASE("seeded") {
    std::mt19937_64 rng(2);
    const auto m = random_markets(rng, 20, 3);
    CHECK(up_approx(m, 50, 4) == up_approx(m, 50, 4));
  }
  SUBCASE("alternation against quadrature") {
    const auto m = alternating(1.3, 0.8, 30);
    // Wealth of (s, 1-s) integrated over the uniform law of s by the midpoint rule.
    const int nodes = 1000000;
    double integral = 0.0;
    for (int i = 0; i < nodes; ++i) {
      const double s = (i + 0.5) / nodes;
      double w = 1.0;
      for (const auto& x : m) w *= s * x[0] + (1 - s) * x[1];
      integral += w / nodes;
    }
    double wealth = 1.0;
    for (double r : up_approx(m, 100000, 12)) wealth *= r;
    CHECK(std::abs(wealth / integral - 1.0) <= 0.01);
  }
}

TEST_CASE("log-optimal solver") {
  SUBCASE("warm start does not change the answer") {
    std::mt19937_64 rng(5);
    const auto m = random_markets(rng, 30, 3);
    const SampleSet s = SampleSet::uniform(m);
    const auto cold = log_optimal(s, LogOptimalParams{});
    const std::vector<double> warm{0.8, 0.1, 0.1};
    const auto hot = log_optimal(s, LogOptimalParams{}, warm);
    CHECK(cold.converged);
    for (int i = 0; i < 3; ++i) CHECK(hot.b[i] == doctest::Approx(cold.b[i]).epsilon(1e-6));
  }
  SUBCASE("ridge pulls toward uniform") {
    const SampleSet s = SampleSet::uniform(std::vector<MarketVector>{MarketVector{{1.2, 0.9}}});
    LogOptimalParams p;
    p.ridge = 100.0;
    CHECK(log_optimal(s, p).b[0] == doctest::Approx(0.5).epsilon(1e-2));
  }
}

TEST_CASE("nearest-neighbour strategies") {
  NearestNeighborConfig cfg;
  cfg.grid = tiny_grid(2, 3);

  SUBCASE("cold start is uniform") {
    const auto m = alternating(1.2, 0.9, 4);
    CHECK(bnn_run(m, cfg)[0] == doctest::Approx(1.05));
  }
  SUBCASE("identity markets keep wealth at one") {
    const std::vector<MarketVector> m(30, MarketVector{{1.0, 1.0}});
    const MarketConfig market{0.4, 0.0, 2.0};
    for (double r : bnn_run(m, cfg)) CHECK(r == doctest::Approx(1.0));
    for (double r : bnn_leveraged_run(m, cfg, market)) CHECK(r == doctest::Approx(1.0));
    for (double r : eg_run(m)) CHECK(r == doctest::Approx(1.0));
    for (double r : ons_run(m)) CHECK(r == doctest::Approx(1.0));
    for (double r : up_approx(m, 10, 1)) CHECK(r == doctest::Approx(1.0));
    for (double r : crp_returns(m, bcrp(m))) CHECK(r == doctest::Approx(1.0));
  }
  SUBCASE("a single all-history expert plays the rolling BCRP") {
    NearestNeighborConfig one;
    one.grid.k_max = 1;
    one.grid.h_max = 1;
    one.grid.schedule = NeighborSchedule{{0.999}};
    std::mt19937_64 rng(6);
    const auto m = random_markets(rng, 40, 2);
    const auto got = bnn_run(m, one);
    for (std::size_t t = 3; t < m.size(); ++t) {
      // Candidates are every day but the first. Stopping is on the objective,
      // so portfolios agree to about the square root of its tolerance.
      const std::span<const MarketVector> seen(m.data() + 1, t - 1);
      const auto b = bcrp(seen);
      CHECK(got[t] == doctest::Approx(b[0] * m[t][0] + b[1] * m[t][1]).epsilon(5e-5));
    }
  }
  SUBCASE("a falling stock is shorted") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.005, 0.005);
    std::vector<MarketVector> m;
    for (int t = 0; t < 200; ++t) m.push_back(MarketVector{{0.97 + u(rng)}});
    const MarketConfig market = MarketConfig::with_default_leverage(0.4, 0.000245);
    const auto experts = bnn_leveraged_experts(m, cfg, market);
    for (const auto& b : experts) CHECK(b[2] > b[1]);
    CHECK(log_wealth(bnn_leveraged_run(m, cfg, market)) > log_wealth(bnn_run(m, cfg)));
  }
}

TEST_CASE("regularized leveraged experts coincide with unconstrained CANN experts") {
  std::mt19937_64 rng(9);
  const auto m = random_markets(rng, 60, 2);
  const MarketConfig market = MarketConfig::with_default_leverage(0.4, 0.000245);
  const double m_bound = compute_m(market);
  const double gamma = m_bound * (1.0 + 1.0 / 0.05) + 1.0;

  NearestNeighborConfig nn;
  nn.grid = tiny_grid(2, 3);
  nn.regularize = true;
  const auto levered = bnn_leveraged_experts(m, nn, market);

  ExpertPoolConfig cfg;
  cfg.n_assets = 2;
  cfg.market = market;
  cfg.risk = make_risk_config(market, 0.95, gamma);
  cfg.grid = nn.grid;
  cfg.solver.tol = 1e-9;
  ExpertPool pool(cfg);
  for (const auto& x : m) pool.observe(x);
  std::vector<SaddleTriple> preds;
  pool.predict(preds);
  REQUIRE(preds.size() == levered.size());
  for (std::size_t e = 0; e < preds.size(); ++e) {
    CHECK(preds[e].lambda == doctest::Approx(0.0));
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::abs(preds[e].portfolio.b[j] - levered[e][j]) <= 1e-5);
  }
}

TEST_CASE("empty inputs") {
  CHECK_THROWS_AS(eg_run(std::vector<MarketVector>{}), DataError);
  CHECK_THROWS_AS(up_approx(alternating(1.1, 0.9, 2), 0, 1), ConfigError);
}
