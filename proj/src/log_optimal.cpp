#include "cann/log_optimal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cann/error.hpp"
#include "cann/simd/kernels.hpp"

namespace cann {

namespace {

class Barrier {
 public:
  Barrier(const SampleSet& s, const LogOptimalParams& p) : s_(s), p_(p), d_(s.dim()) {}

  // Objective to minimise at barrier weight tau; +inf outside the domain.
  double value(std::span<const double> b, double tau) {
    for (double v : b)
      if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    returns(b);
    const auto w = s_.weights();
    double f = 0.0;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      if (!(ret_[i] > 0.0)) return std::numeric_limits<double>::infinity();
      f -= w[i] * std::log(ret_[i]);
    }
    for (double v : b) f += p_.ridge * v * v - tau * std::log(v);
    return f;
  }

  // Newton step for the equality-constrained problem at b; returns the
  // Newton decrement squared.
  double direction(std::span<const double> b, double tau, std::vector<double>& step) {
    returns(b);
    const auto w = s_.weights();
    const std::size_t n = s_.size();
    g_coef_.resize(n);
    h_coef_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g_coef_[i] = -w[i] / ret_[i];
      h_coef_[i] = w[i] / (ret_[i] * ret_[i]);
    }
    const Eigen::Index dim = static_cast<Eigen::Index>(d_ + 1);
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs(dim);
    double mass = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      const auto cj = s_.column(j);
      for (std::size_t k = j; k < d_; ++k) {
        const double v = simd::weighted_dot(h_coef_, cj, s_.column(k));
        kkt(j, k) = v;
        kkt(k, j) = v;
      }
      kkt(j, j) += 2.0 * p_.ridge + tau / (b[j] * b[j]);
      kkt(j, d_) = kkt(d_, j) = 1.0;
      rhs(j) = -(simd::dot(g_coef_, cj) + 2.0 * p_.ridge * b[j] - tau / b[j]);
      mass += b[j];
    }
    rhs(d_) = p_.mass - mass;
    const Eigen::VectorXd sol = kkt.partialPivLu().solve(rhs);
    step.resize(d_);
    double decrement = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      step[j] = sol(j);
      decrement += step[j] * rhs(j);
    }
    return std::isfinite(decrement) ? std::max(decrement, 0.0) : -1.0;
  }

  double max_step(std::span<const double> b, std::span<const double> step) {
    double t = 1.0;
    for (std::size_t j = 0; j < d_; ++j)
      if (step[j] < 0.0) t = std::min(t, 0.99 * b[j] / -step[j]);
    returns(b);
    dret_.assign(s_.size(), 0.0);
    for (std::size_t j = 0; j < d_; ++j)
      if (step[j] != 0.0) simd::axpy(dret_, s_.column(j), step[j]);
    for (std::size_t i = 0; i < s_.size(); ++i)
      if (dret_[i] < 0.0) t = std::min(t, 0.99 * ret_[i] / -dret_[i]);
    return t;
  }

 private:
  void returns(std::span<const double> b) {
    ret_.assign(s_.size(), -p_.offset);
    for (std::size_t j = 0; j < d_; ++j) simd::axpy(ret_, s_.column(j), b[j]);
  }

  const SampleSet& s_;
  const LogOptimalParams& p_;
  std::size_t d_;
  std::vector<double> ret_, dret_, g_coef_, h_coef_;
};

}  // namespace

LogOptimalResult log_optimal(const SampleSet& samples, const LogOptimalParams& params,
                             std::span<const double> warm) {
  if (samples.empty()) throw Error("log_optimal needs a nonempty sample");
  const std::size_t d = samples.dim();
  Barrier f(samples, params);

  std::vector<double> b(d, params.mass / static_cast<double>(d));
  double tau = 1e-2;
  if (!std::isfinite(f.value(b, tau))) {
    // lean on instrument 0 (cash in the transformed layout)
    for (double theta : {0.5, 0.9, 0.99, 0.999}) {
      std::fill(b.begin(), b.end(), (1.0 - theta) * params.mass / static_cast<double>(d));
      b[0] += theta * params.mass;
      if (std::isfinite(f.value(b, tau))) break;
    }
  }
  if (warm.size() == d) {
    std::vector<double> w(warm.begin(), warm.end());
    const double floor = 1e-6 * params.mass / static_cast<double>(d);
    double total = 0.0;
    for (double& v : w) total += (v = std::max(v, floor));
    for (double& v : w) v *= params.mass / total;
    if (std::isfinite(f.value(w, 1e-6))) {
      b = std::move(w);
      tau = 1e-6;
    }
  }

  LogOptimalResult out;
  const double tau_min = params.tol;
  std::vector<double> step, trial(d);
  int iters = 0;
  bool stage_converged = false;
  while (true) {
    stage_converged = false;
    while (iters < params.max_iters) {
      const double dec = f.direction(b, tau, step);
      if (dec < 0.0) break;
      if (dec / 2.0 <= 0.1 * params.tol) {
        stage_converged = true;
        break;
      }
      ++iters;
      double t = f.max_step(b, step);
      const double f0 = f.value(b, tau);
      bool moved = false;
      for (int half = 0; half < 50; ++half, t *= 0.5) {
        for (std::size_t j = 0; j < d; ++j) trial[j] = b[j] + t * step[j];
        if (f.value(trial, tau) <= f0 - 0.25 * t * dec) {
          moved = true;
          break;
        }
      }
      if (!moved) {
        stage_converged = true;  // at machine precision for this stage
        break;
      }
      b = trial;
    }
    if (tau <= tau_min || iters >= params.max_iters) break;
    tau = std::max(tau * 0.1, tau_min);
  }
  double total = 0.0;
  for (double v : b) total += v;
  for (double& v : b) v *= params.mass / total;
  out.value = -f.value(b, 0.0);
  for (double v : b) out.value += params.ridge * v * v;
  out.b = std::move(b);
  out.iterations = iters;
  out.converged = stage_converged;
  return out;
}

}  // namespace cann
