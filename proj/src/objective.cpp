#include "cann/objective.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cann/error.hpp"
#include "cann/simd/kernels.hpp"

namespace cann {

Portfolio Portfolio::all_cash(std::size_t dim, double mass) {
  Portfolio p;
  p.b.assign(dim, 0.0);
  p.b[0] = mass;
  return p;
}

Portfolio Portfolio::uniform(std::size_t dim, double mass) {
  Portfolio p;
  p.b.assign(dim, mass / static_cast<double>(dim));
  return p;
}

double Portfolio::mass() const noexcept { return std::accumulate(b.begin(), b.end(), 0.0); }

bool Portfolio::feasible(double mass_target, double tol) const noexcept {
  for (double v : b)
    if (!(v >= 0.0)) return false;
  return std::abs(mass() - mass_target) <= tol;
}

void RiskConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("/risk/alpha", "must lie in (0, 1)");
  if (!(gamma > 0.0)) throw ConfigError("/risk/gamma", "must be > 0");
  if (!(bound_m > 0.0) || !std::isfinite(bound_m)) throw ConfigError("/risk/M", "must be > 0");
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
    throw ConfigError("/risk/lambda_max", "must be > 0");
}

double daily_return(std::span<const double> b, std::span<const double> xt, double offset) {
  return simd::dot(b, xt) - offset;
}

double omega(std::span<const double> b, std::span<const double> xt, double offset) {
  const double ret = daily_return(b, xt, offset);
  if (!(ret > 0.0)) {
    throw DomainError("daily return " + std::to_string(ret) +
                      " is not positive; the leverage override admits bankruptcy");
  }
  return -std::log(ret);
}

double lagrangian_from_loss(double loss, double c, double lambda, const RiskConfig& risk) noexcept {
  const double excess = loss > c ? loss - c : 0.0;
  return loss + lambda * (c + risk.tail_scale() * excess - risk.gamma);
}

double inst_lagrangian(const SaddleTriple& t, std::span<const double> xt, double offset,
                       const RiskConfig& risk) {
  return lagrangian_from_loss(omega(t.portfolio.view(), xt, offset), t.c, t.lambda, risk);
}

LagrangianGradient inst_lagrangian_subgradient(const SaddleTriple& t, std::span<const double> xt,
                                               double offset, const RiskConfig& risk) {
  const auto b = t.portfolio.view();
  const double ret = daily_return(b, xt, offset);
  if (!(ret > 0.0)) throw DomainError("daily return is not positive");
  const double loss = -std::log(ret);
  const bool active = loss > t.c;
  // d omega / d b_j = -x'_j / ret
  const double scale = -(1.0 + (active ? t.lambda * risk.tail_scale() : 0.0)) / ret;
  LagrangianGradient g;
  g.d_b.resize(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) g.d_b[j] = scale * xt[j];
  g.d_c = t.lambda * (1.0 - (active ? risk.tail_scale() : 0.0));
  g.d_lambda = t.c + (active ? risk.tail_scale() * (loss - t.c) : 0.0) - risk.gamma;
  return g;
}

ReturnRange return_range(const MarketConfig& m) {
  const double L = m.leverage, B = m.bound, r = m.rate;
  return {1.0 + r - L * (B + r), 1.0 + r + L * B};
}

double compute_m(const MarketConfig& m) {
  const ReturnRange range = return_range(m);
  if (!(range.lo > 0.0)) {
    throw ConfigError("/market/L", "leverage " + std::to_string(m.leverage) +
                                       " admits a non-positive daily return");
  }
  return std::max(std::abs(std::log(range.lo)), std::abs(std::log(range.hi)));
}

double compute_lambda_max(double bound_m, double gamma, std::optional<double> slack) {
  const double delta = slack.value_or(gamma / 2.0);
  if (!(delta > 0.0) || !(delta < gamma))
    throw ConfigError("/risk/slater_slack", "must lie in (0, gamma)");
  return 2.0 * bound_m / delta;
}

RiskConfig make_risk_config(const MarketConfig& m, double alpha, double gamma,
                            std::optional<double> slack) {
  RiskConfig risk;
  risk.alpha = alpha;
  risk.gamma = gamma;
  risk.bound_m = compute_m(m);
  risk.lambda_max = compute_lambda_max(risk.bound_m, gamma, slack);
  risk.validate();
  return risk;
}

}  // namespace cann
