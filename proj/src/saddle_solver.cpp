#include "cann/saddle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "cann/error.hpp"
#include "cann/simd/kernels.hpp"
#include "cann/simplex.hpp"

namespace cann {

SolverMethod parse_solver_method(const std::string& name) {
  if (name == "newton") return SolverMethod::newton;
  if (name == "pgda") return SolverMethod::pgda;
  throw ConfigError("/solver/method", "unknown solver method '" + name + "'");
}

std::string solver_method_name(SolverMethod m) {
  return m == SolverMethod::newton ? "newton" : "pgda";
}

void SolverParams::validate() const {
  if (!(tol > 0.0)) throw ConfigError("/solver/tol", "must be > 0");
  if (max_iters < 1) throw ConfigError("/solver/max_iters", "must be >= 1");
  if (!(merge_quantum >= 0.0)) throw ConfigError("/solver/merge_quantum", "must be >= 0");
  if (!(regularizer_scale > 0.0) || !std::isfinite(regularizer_scale))
    throw ConfigError("/solver/regularizer_scale", "must be > 0");
}

SaddleSpec SaddleSpec::make(const MarketConfig& market, const RiskConfig& risk, double reg) {
  return {market.offset(), market.leverage, risk, reg};
}

double expert_regularizer(std::size_t t, int h, int k) {
  return 1.0 / static_cast<double>(t) + 1.0 / h + 1.0 / k;
}

double regularized_loss(const SaddleTriple& t, std::span<const double> xt, double offset,
                        const RiskConfig& risk, double reg) {
  const double norm = simd::dot(t.portfolio.view(), t.portfolio.view()) + t.c * t.c;
  return inst_lagrangian(t, xt, offset, risk) + reg * (norm - t.lambda * t.lambda);
}

namespace {

// Per-sample daily returns, computed column by column.
void sample_returns(const SampleSet& s, std::span<const double> b, double offset,
                    std::vector<double>& ret) {
  ret.assign(s.size(), -offset);
  for (std::size_t j = 0; j < s.dim(); ++j)
    if (b[j] != 0.0) simd::axpy(ret, s.column(j), b[j]);
}

struct LossMoments {
  double mean_loss = 0.0;  // E w
  double tail = 0.0;       // E (w - c)^+
};

LossMoments loss_moments(const SampleSet& s, std::span<const double> b, double c, double offset) {
  std::vector<double> ret;
  sample_returns(s, b, offset, ret);
  LossMoments m;
  const auto w = s.weights();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(ret[i] > 0.0)) throw DomainError("daily return is not positive on a sample");
    const double loss = -std::log(ret[i]);
    m.mean_loss += w[i] * loss;
    m.tail += w[i] * std::max(loss - c, 0.0);
  }
  return m;
}

double softplus(double e, double tau) {
  if (tau <= 0.0) return std::max(e, 0.0);
  return std::max(e, 0.0) + tau * std::log1p(std::exp(-std::abs(e) / tau));
}

double sigmoid(double e, double tau) {
  if (tau <= 0.0) return e > 0.0 ? 1.0 : (e < 0.0 ? 0.0 : 0.5);
  const double z = e / tau;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

}  // namespace

double mean_regularized_loss(const SaddleTriple& t, const SampleSet& samples,
                             const SaddleSpec& spec) {
  const auto b = t.portfolio.view();
  const LossMoments m = loss_moments(samples, b, t.c, spec.offset);
  const double g = t.c + spec.risk.tail_scale() * m.tail - spec.risk.gamma;
  const double norm = simd::dot(b, b) + t.c * t.c;
  return m.mean_loss + t.lambda * g + spec.reg * (norm - t.lambda * t.lambda);
}

PrimalValue primal_value(const Portfolio& p, double c, const SampleSet& samples,
                         const SaddleSpec& spec) {
  const auto b = p.view();
  const LossMoments m = loss_moments(samples, b, c, spec.offset);
  const double g = c + spec.risk.tail_scale() * m.tail - spec.risk.gamma;
  double lambda = 0.0;
  if (spec.reg > 0.0)
    lambda = std::clamp(g / (2.0 * spec.reg), 0.0, spec.risk.lambda_max);
  else
    lambda = g > 0.0 ? spec.risk.lambda_max : 0.0;
  const double norm = simd::dot(b, b) + c * c;
  return {m.mean_loss + lambda * g + spec.reg * (norm - lambda * lambda), lambda};
}

namespace {

// min over (b, c) of F(., ., lambda) >= G(y) + min_x <g, x - y> + reg |x - y|^2
// for any point y and any subgradient g of a convex minorant G of F(., ., lambda).
// The plus-part enters through the per-sample slope s_i and value pen_i.
double linearized_bound(const SaddleTriple& t, const SampleSet& samples, const SaddleSpec& spec,
                        std::span<const double> ret, std::span<const double> slope,
                        std::span<const double> penalty) {
  const auto b = t.portfolio.view();
  const std::size_t d = b.size();
  const double kappa = spec.risk.tail_scale();
  const double lam = t.lambda;
  const auto w = samples.weights();
  std::vector<double> coef(samples.size());
  double value = 0.0, sum_ws = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    value += w[i] * (-std::log(ret[i]) + lam * kappa * penalty[i]);
    sum_ws += w[i] * slope[i];
    coef[i] = -w[i] * (1.0 + lam * kappa * slope[i]) / ret[i];
  }
  const double norm = simd::dot(b, b) + t.c * t.c;
  value += lam * (t.c - spec.risk.gamma) + spec.reg * (norm - lam * lam);

  std::vector<double> grad(d);
  for (std::size_t j = 0; j < d; ++j)
    grad[j] = simd::dot(coef, samples.column(j)) + 2.0 * spec.reg * b[j];
  const double grad_c = lam * (1.0 - kappa * sum_ws) + 2.0 * spec.reg * t.c;
  const double m = spec.risk.bound_m;

  double linear = 0.0;
  if (spec.reg > 0.0) {
    std::vector<double> target(d);
    for (std::size_t j = 0; j < d; ++j) target[j] = b[j] - grad[j] / (2.0 * spec.reg);
    project_onto_simplex(target, spec.mass);
    for (std::size_t j = 0; j < d; ++j) {
      const double dx = target[j] - b[j];
      linear += grad[j] * dx + spec.reg * dx * dx;
    }
    const double dc = std::clamp(t.c - grad_c / (2.0 * spec.reg), -m, m) - t.c;
    linear += grad_c * dc + spec.reg * dc * dc;
  } else {
    // best vertex of the simplex, best end of [-M, M]
    const double gmin = *std::min_element(grad.begin(), grad.end());
    double along = 0.0;
    for (std::size_t j = 0; j < d; ++j) along += grad[j] * b[j];
    linear += spec.mass * gmin - along;
    linear += grad_c >= 0.0 ? grad_c * (-m - t.c) : grad_c * (m - t.c);
  }
  return value + linear;
}

// Softplus minorant at temperature tau: softplus - tau log 2 <= (e)^+.
double smoothed_bound(const SaddleTriple& t, const SampleSet& samples, const SaddleSpec& spec,
                      double tau) {
  std::vector<double> ret;
  sample_returns(samples, t.portfolio.view(), spec.offset, ret);
  std::vector<double> slope(ret.size()), penalty(ret.size());
  for (std::size_t i = 0; i < ret.size(); ++i) {
    const double e = -std::log(ret[i]) - t.c;
    slope[i] = sigmoid(e, tau);
    penalty[i] = softplus(e, tau);
  }
  return linearized_bound(t, samples, spec, ret, slope, penalty) -
         t.lambda * spec.risk.tail_scale() * tau * std::log(2.0);
}

// Exact plus-part with c moved onto the nearest kink, whose slope is then
// free in [0, 1]; the bound is concave in that slope.
double kink_bound(const SaddleTriple& t, const SampleSet& samples, const SaddleSpec& spec) {
  std::vector<double> ret;
  sample_returns(samples, t.portfolio.view(), spec.offset, ret);
  std::size_t kink = 0;
  for (std::size_t i = 1; i < ret.size(); ++i)
    if (std::abs(-std::log(ret[i]) - t.c) < std::abs(-std::log(ret[kink]) - t.c)) kink = i;
  SaddleTriple y = t;
  y.c = std::clamp(-std::log(ret[kink]), -spec.risk.bound_m, spec.risk.bound_m);
  std::vector<double> slope(ret.size()), penalty(ret.size());
  for (std::size_t i = 0; i < ret.size(); ++i) {
    const double e = -std::log(ret[i]) - y.c;
    slope[i] = e > 0.0 ? 1.0 : 0.0;
    penalty[i] = std::max(e, 0.0);
  }
  const auto at = [&](double theta) {
    slope[kink] = theta;
    return linearized_bound(y, samples, spec, ret, slope, penalty);
  };
  double lo = 0.0, hi = 1.0;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
  double f1 = at(x1), f2 = at(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = at(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = at(x1);
    }
  }
  return std::max({f1, f2, at(0.0), at(1.0)});
}

}  // namespace

double dual_lower_bound(const SaddleTriple& t, const SampleSet& samples, const SaddleSpec& spec) {
  double best = kink_bound(t, samples, spec);
  for (double tau : {1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4})
    best = std::max(best, smoothed_bound(t, samples, spec, tau));
  return best;
}

double duality_gap(const SaddleTriple& t, const SampleSet& samples, const SaddleSpec& spec) {
  return primal_value(t.portfolio, t.c, samples, spec).value - dual_lower_bound(t, samples, spec);
}

namespace {

struct Point {
  std::vector<double> b;
  double c = 0.0;
  double lambda = 0.0;
};

// Maximiser over (0, lmax) of lambda g - reg lambda^2 + tau log(lambda (lmax - lambda)).
// The derivative is strictly decreasing, so safeguarded Newton on a bracket.
double barrier_lambda(double g, double reg, double tau, double lmax) {
  double lo = 0.0, hi = lmax;
  double x = reg > 0.0 ? std::clamp(g / (2.0 * reg), 0.25 * lmax * 1e-6, lmax * (1.0 - 1e-6))
                       : 0.5 * lmax;
  for (int it = 0; it < 200; ++it) {
    const double f = g - 2.0 * reg * x + tau / x - tau / (lmax - x);
    if (f > 0.0) lo = x;
    else hi = x;
    const double df = -2.0 * reg - tau / (x * x) - tau / ((lmax - x) * (lmax - x));
    double next = x - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * x || hi - lo <= 1e-15 * hi) return next;
    x = next;
  }
  return x;
}

// Smoothed barrier problem at temperature tau with lambda maximised out:
// phi(b, c) = max_lambda F(b, c, lambda) is convex, so Newton steps on the
// KKT system (whose Schur complement in lambda is phi's Hessian) are
// globalised by a line search on phi itself.
class NewtonSystem {
 public:
  NewtonSystem(const SampleSet& s, const SaddleSpec& spec) : s_(s), spec_(spec), d_(s.dim()) {}

  /// Sets p.lambda to its maximiser and returns the residual norm with the
  /// mass-constraint multiplier eliminated; +inf outside the domain.
  double residual(Point& p, double tau) {
    if (!evaluate(p, tau)) return std::numeric_limits<double>::infinity();
    return residual_from_grad();
  }

  /// phi at the point of the last successful residual() call.
  double value() const noexcept { return value_; }

  /// Directional derivative of phi along (step.b, step.c).
  double slope(const Point& step) const {
    double d = grad_c_ * step.c;
    for (std::size_t j = 0; j < d_; ++j) d += grad_b_[j] * step.b[j];
    return d;
  }

  /// Newton direction at p (evaluate() must have run on p).
  bool direction(const Point& p, double tau, Point& step) {
    const std::size_t d = d_;
    const double kappa = spec_.risk.tail_scale();
    const double lam = p.lambda;
    const double m = spec_.risk.bound_m;
    const double lmax = spec_.risk.lambda_max;
    const auto w = s_.weights();
    const std::size_t n = s_.size();

    hess_coef_.resize(n);
    bc_coef_.resize(n);
    bl_coef_.resize(n);
    double sum_wq = 0.0, sum_ws = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double inv = 1.0 / ret_[i];
      hess_coef_[i] = w[i] * (1.0 + lam * kappa * (s_i_[i] + q_i_[i])) * inv * inv;
      bc_coef_[i] = w[i] * lam * kappa * q_i_[i] * inv;
      bl_coef_[i] = -w[i] * kappa * s_i_[i] * inv;
      sum_wq += w[i] * q_i_[i];
      sum_ws += w[i] * s_i_[i];
    }
    const Eigen::Index dim = static_cast<Eigen::Index>(d + 3);
    kkt_.setZero(dim, dim);
    for (std::size_t j = 0; j < d; ++j) {
      const auto cj = s_.column(j);
      for (std::size_t k = j; k < d; ++k) {
        const double v = simd::weighted_dot(hess_coef_, cj, s_.column(k));
        kkt_(j, k) = v;
        kkt_(k, j) = v;
      }
      kkt_(j, j) += 2.0 * spec_.reg + tau / (p.b[j] * p.b[j]);
      const double hbc = simd::dot(bc_coef_, cj);
      const double hbl = simd::dot(bl_coef_, cj);
      kkt_(j, d) = kkt_(d, j) = hbc;
      kkt_(j, d + 1) = kkt_(d + 1, j) = hbl;
      kkt_(j, d + 2) = kkt_(d + 2, j) = 1.0;
    }
    kkt_(d, d) = lam * kappa * sum_wq + 2.0 * spec_.reg + tau / ((m - p.c) * (m - p.c)) +
                 tau / ((m + p.c) * (m + p.c));
    kkt_(d, d + 1) = kkt_(d + 1, d) = 1.0 - kappa * sum_ws;
    kkt_(d + 1, d + 1) = -2.0 * spec_.reg - tau / (lam * lam) -
                         tau / ((lmax - lam) * (lmax - lam));

    rhs_.resize(dim);
    double mass = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      rhs_(j) = -grad_b_[j];
      mass += p.b[j];
    }
    rhs_(d) = -grad_c_;
    rhs_(d + 1) = -grad_l_;
    rhs_(d + 2) = spec_.mass - mass;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt_);
    const Eigen::VectorXd sol = lu.solve(rhs_);
    if (!sol.allFinite()) return false;
    step.b.resize(d);
    for (std::size_t j = 0; j < d; ++j) step.b[j] = sol(j);
    step.c = sol(d);
    step.lambda = sol(d + 1);
    return true;
  }

  /// Largest step in (0, 1] keeping 1% of the distance to every boundary.
  double max_step(const Point& p, const Point& dir) const {
    double t = 1.0;
    const double keep = 0.99;
    for (std::size_t j = 0; j < d_; ++j)
      if (dir.b[j] < 0.0) t = std::min(t, keep * p.b[j] / -dir.b[j]);
    const double m = spec_.risk.bound_m;
    if (dir.c > 0.0) t = std::min(t, keep * (m - p.c) / dir.c);
    if (dir.c < 0.0) t = std::min(t, keep * (m + p.c) / -dir.c);
    const double lmax = spec_.risk.lambda_max;
    if (dir.lambda > 0.0) t = std::min(t, keep * (lmax - p.lambda) / dir.lambda);
    if (dir.lambda < 0.0) t = std::min(t, keep * p.lambda / -dir.lambda);
    // returns stay positive
    dret_.assign(s_.size(), 0.0);
    for (std::size_t j = 0; j < d_; ++j)
      if (dir.b[j] != 0.0) simd::axpy(dret_, s_.column(j), dir.b[j]);
    for (std::size_t i = 0; i < s_.size(); ++i)
      if (dret_[i] < 0.0) t = std::min(t, keep * ret_[i] / -dret_[i]);
    return t;
  }

 private:
  bool evaluate(Point& p, double tau) {
    const double kappa = spec_.risk.tail_scale();
    const double m = spec_.risk.bound_m;
    const double lmax = spec_.risk.lambda_max;
    if (!(p.c > -m && p.c < m)) return false;
    double log_b = 0.0, norm = p.c * p.c;
    for (double v : p.b) {
      if (!(v > 0.0)) return false;
      log_b += std::log(v);
      norm += v * v;
    }
    sample_returns(s_, p.b, spec_.offset, ret_);
    const std::size_t n = s_.size();
    const auto w = s_.weights();
    s_i_.resize(n);
    q_i_.resize(n);
    grad_coef_.resize(n);
    double sum_ws = 0.0, sum_wsp = 0.0, mean_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(ret_[i] > 0.0)) return false;
      const double loss = -std::log(ret_[i]);
      const double e = loss - p.c;
      const double s = sigmoid(e, tau);
      s_i_[i] = s;
      q_i_[i] = s * (1.0 - s) / tau;
      sum_ws += w[i] * s;
      sum_wsp += w[i] * softplus(e, tau);
      mean_loss += w[i] * loss;
    }
    const double g = p.c - spec_.risk.gamma + kappa * sum_wsp;
    const double lam = barrier_lambda(g, spec_.reg, tau, lmax);
    p.lambda = lam;
    for (std::size_t i = 0; i < n; ++i) grad_coef_[i] = -w[i] * (1.0 + lam * kappa * s_i_[i]) / ret_[i];
    grad_b_.resize(d_);
    for (std::size_t j = 0; j < d_; ++j)
      grad_b_[j] = simd::dot(grad_coef_, s_.column(j)) + 2.0 * spec_.reg * p.b[j] - tau / p.b[j];
    grad_c_ = lam * (1.0 - kappa * sum_ws) + 2.0 * spec_.reg * p.c + tau / (m - p.c) -
              tau / (m + p.c);
    grad_l_ = g - 2.0 * spec_.reg * lam + tau / lam - tau / (lmax - lam);
    value_ = mean_loss + lam * g - spec_.reg * lam * lam + spec_.reg * norm - tau * log_b -
             tau * (std::log(m - p.c) + std::log(m + p.c)) +
             tau * (std::log(lam) + std::log(lmax - lam));
    return true;
  }

  double residual_from_grad() const {
    const double mean = std::accumulate(grad_b_.begin(), grad_b_.end(), 0.0) / static_cast<double>(d_);
    double r = grad_c_ * grad_c_ + grad_l_ * grad_l_;
    for (double g : grad_b_) r += (g - mean) * (g - mean);
    return std::sqrt(r);
  }

  const SampleSet& s_;
  const SaddleSpec& spec_;
  std::size_t d_;
  std::vector<double> ret_, s_i_, q_i_, grad_coef_, grad_b_;
  std::vector<double> hess_coef_, bc_coef_, bl_coef_;
  mutable std::vector<double> dret_;
  double grad_c_ = 0.0, grad_l_ = 0.0, value_ = 0.0;
  Eigen::MatrixXd kkt_;
  Eigen::VectorXd rhs_;
};

bool returns_positive(const SampleSet& s, std::span<const double> b, double offset) {
  std::vector<double> ret;
  sample_returns(s, b, offset, ret);
  return std::all_of(ret.begin(), ret.end(), [](double r) { return r > 0.0; });
}

Point cold_start(const SampleSet& s, const SaddleSpec& spec) {
  const std::size_t d = s.dim();
  Point p;
  // uniform, blended toward cash until every sample return is positive
  for (double theta : {0.0, 0.5, 0.9, 0.99, 0.999, 0.9999}) {
    p.b.assign(d, (1.0 - theta) * spec.mass / static_cast<double>(d));
    p.b[0] += theta * spec.mass;
    if (returns_positive(s, p.b, spec.offset)) break;
  }
  p.c = 0.0;
  p.lambda = std::min(1.0, 0.5 * spec.risk.lambda_max);
  return p;
}

Point interior_from(const SaddleTriple& warm, const SaddleSpec& spec, double floor) {
  Point p;
  p.b = warm.portfolio.b;
  const double unit = spec.mass / static_cast<double>(p.b.size());
  double total = 0.0;
  for (double& v : p.b) {
    v = std::max(v, floor * unit);
    total += v;
  }
  for (double& v : p.b) v *= spec.mass / total;
  const double m = spec.risk.bound_m;
  p.c = std::clamp(warm.c, -m * (1.0 - floor), m * (1.0 - floor));
  const double lmax = spec.risk.lambda_max;
  p.lambda = std::clamp(warm.lambda, floor * std::min(1.0, lmax), lmax * (1.0 - floor));
  return p;
}

SaddleTriple to_triple(const Point& p) {
  SaddleTriple t;
  t.portfolio.b = p.b;
  t.c = p.c;
  t.lambda = p.lambda;
  return t;
}

SaddleResult solve_newton(const SampleSet& s, const SaddleSpec& spec, const SolverParams& params,
                          const SaddleTriple* warm) {
  NewtonSystem sys(s, spec);
  const double kappa = spec.risk.tail_scale();
  const double tau_floor = 0.01 * params.tol;

  double tau = 1e-2;
  Point x = cold_start(s, spec);
  if (warm != nullptr && warm->portfolio.size() == s.dim()) {
    const double warm_tau = 1e-6;
    Point w = interior_from(*warm, spec, warm_tau);
    if (returns_positive(s, w.b, spec.offset)) {
      x = std::move(w);
      tau = warm_tau;
    }
  }

  SaddleResult out;
  double merit = sys.residual(x, tau);
  Point best = x;
  double best_merit = merit;
  int iters = 0;
  Point dir, trial, trial_best;
  while (true) {
    // Smoothing error in the plus-part is at most lambda kappa tau log 2.
    const double stage_floor = tau_floor / std::max(1.0, x.lambda * kappa);
    const bool final_stage = tau <= stage_floor;
    const double target = final_stage ? params.tol : std::max(params.tol, tau);
    best = x;
    best_merit = merit;
    while (merit > target && iters < params.max_iters) {
      ++iters;
      if (!sys.direction(x, tau, dir)) break;
      dir.lambda = 0.0;  // lambda follows (b, c)
      const double value = sys.value();
      const double slope = sys.slope(dir);
      double step = sys.max_step(x, dir);
      // Once the predicted decrease in phi is below rounding, judge steps by
      // the residual instead.
      const bool flat = -slope * step <= 1e-12 * std::max(1.0, std::abs(value));
      double trial_best_merit = std::numeric_limits<double>::infinity();
      bool accepted = false;
      for (int half = 0; half < 50; ++half, step *= 0.5) {
        trial.b.resize(x.b.size());
        for (std::size_t j = 0; j < x.b.size(); ++j) trial.b[j] = x.b[j] + step * dir.b[j];
        trial.c = x.c + step * dir.c;
        trial.lambda = x.lambda;
        const double r = sys.residual(trial, tau);
        if (!std::isfinite(r)) continue;
        if (r < trial_best_merit) {
          trial_best_merit = r;
          trial_best = trial;
        }
        if (flat ? r <= (1.0 - 1e-4 * step) * merit
                 : sys.value() <= value + 1e-4 * step * std::min(slope, 0.0)) {
          trial_best = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted && !(trial_best_merit < merit)) break;
      x = trial_best;
      merit = sys.residual(x, tau);  // refresh cached state at x
      if (merit < best_merit) {
        best = x;
        best_merit = merit;
      }
    }
    if (final_stage || iters >= params.max_iters) break;
    tau = std::max(tau * 0.01, tau_floor / std::max(1.0, x.lambda * kappa));
    merit = sys.residual(x, tau);
  }

  out.triple = to_triple(best);
  // drop the barrier's strictly positive dust
  double total = 0.0;
  for (double& v : out.triple.portfolio.b) total += v;
  for (double& v : out.triple.portfolio.b) v *= spec.mass / total;
  out.diagnostics.iterations = iters;
  out.diagnostics.residual = best_merit;
  out.diagnostics.converged = best_merit <= params.tol;
  return out;
}

// Projected-gradient-map residual of the exact (sub)gradient.
struct PgdaGradient {
  std::vector<double> b;
  double c = 0.0;
  double lambda = 0.0;
};

PgdaGradient subgradient(const SampleSet& s, const SaddleSpec& spec, const Point& p) {
  const double kappa = spec.risk.tail_scale();
  std::vector<double> ret;
  sample_returns(s, p.b, spec.offset, ret);
  const auto w = s.weights();
  std::vector<double> coef(s.size());
  double active = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(ret[i] > 0.0)) throw DomainError("daily return is not positive on a sample");
    const double e = -std::log(ret[i]) - p.c;
    const bool on = e > 0.0;
    coef[i] = -w[i] * (1.0 + (on ? p.lambda * kappa : 0.0)) / ret[i];
    if (on) {
      active += w[i];
      tail += w[i] * e;
    }
  }
  PgdaGradient g;
  g.b.resize(p.b.size());
  for (std::size_t j = 0; j < p.b.size(); ++j)
    g.b[j] = simd::dot(coef, s.column(j)) + 2.0 * spec.reg * p.b[j];
  g.c = p.lambda * (1.0 - kappa * active) + 2.0 * spec.reg * p.c;
  g.lambda = p.c + kappa * tail - spec.risk.gamma - 2.0 * spec.reg * p.lambda;
  return g;
}

double gradient_map_residual(const SaddleSpec& spec, const Point& p, const PgdaGradient& g) {
  std::vector<double> moved(p.b.size());
  for (std::size_t j = 0; j < p.b.size(); ++j) moved[j] = p.b[j] - g.b[j];
  project_onto_simplex(moved, spec.mass);
  double r = 0.0;
  for (std::size_t j = 0; j < p.b.size(); ++j) r += (moved[j] - p.b[j]) * (moved[j] - p.b[j]);
  const double m = spec.risk.bound_m;
  const double dc = std::clamp(p.c - g.c, -m, m) - p.c;
  const double dl = std::clamp(p.lambda + g.lambda, 0.0, spec.risk.lambda_max) - p.lambda;
  return std::sqrt(r + dc * dc + dl * dl);
}

SaddleResult solve_pgda(const SampleSet& s, const SaddleSpec& spec, const SolverParams& params,
                        const SaddleTriple* warm) {
  if (!(spec.reg > 0.0)) throw ConfigError("/solver/method", "pgda needs a positive regularizer");
  Point x;
  if (warm != nullptr && warm->portfolio.size() == s.dim()) {
    x.b = warm->portfolio.b;
    x.c = warm->c;
    x.lambda = warm->lambda;
  } else {
    x.b.assign(s.dim(), spec.mass / static_cast<double>(s.dim()));
  }
  const double m = spec.risk.bound_m;
  Point best = x;
  double best_res = std::numeric_limits<double>::infinity();
  int it = 0;
  for (it = 1; it <= params.max_iters; ++it) {
    PgdaGradient g = subgradient(s, spec, x);
    const double res = gradient_map_residual(spec, x, g);
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= params.tol) break;
    const double eta = 1.0 / (spec.reg * it);
    for (std::size_t j = 0; j < x.b.size(); ++j) x.b[j] -= eta * g.b[j];
    project_onto_simplex(x.b, spec.mass);
    x.c = std::clamp(x.c - eta * g.c, -m, m);
    g = subgradient(s, spec, x);
    x.lambda = std::clamp(x.lambda + eta * g.lambda, 0.0, spec.risk.lambda_max);
  }
  SaddleResult out;
  out.triple = to_triple(best);
  out.diagnostics.iterations = std::min(it, params.max_iters);
  out.diagnostics.residual = best_res;
  out.diagnostics.converged = best_res <= params.tol;
  return out;
}

}  // namespace

SaddleResult solve_saddle(const SampleSet& samples, const SaddleSpec& spec,
                          const SolverParams& params, const SaddleTriple* warm) {
  if (samples.empty()) throw Error("solve_saddle needs a nonempty sample");
  if (!(spec.reg >= 0.0)) throw ConfigError("/solver/reg", "must be >= 0");
  return params.method == SolverMethod::newton ? solve_newton(samples, spec, params, warm)
                                               : solve_pgda(samples, spec, params, warm);
}

}  // namespace cann
