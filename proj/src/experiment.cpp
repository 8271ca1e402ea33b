#include "cann/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cann/benchmarks.hpp"
#include "cann/error.hpp"
#include "cann/metrics.hpp"
#include "cann/parallel.hpp"

namespace cann {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

CannRun run_cann(std::span<const MarketVector> markets, const MarketConfig& market,
                 const RiskConfig& risk, const ExpertGrid& grid, const SolverParams& solver,
                 std::size_t workers) {
  if (markets.empty()) throw DataError("no market days to run on");
  ExpertPoolConfig pc;
  pc.n_assets = markets.front().size();
  pc.market = market;
  pc.risk = risk;
  pc.grid = grid;
  pc.solver = solver;
  pc.workers = workers;
  ExpertPool pool(pc);
  Aggregator agg(pool, market, risk);
  CannRun out;
  out.days = run(agg, markets);
  out.diagnostics = pool.diagnostics();
  return out;
}

RiskConfig risk_for(const ExperimentConfig& cfg, double gamma) {
  RiskConfig risk;
  risk.alpha = cfg.risk.alpha;
  risk.gamma = gamma;
  try {
    risk.bound_m = compute_m(cfg.market.market);
  } catch (const ConfigError& e) {
    throw ConfigError("/market" + e.path().substr(std::string("/market").size()), e.message());
  }
  std::optional<double> slack = cfg.risk.slater_slack;
  try {
    risk.lambda_max = compute_lambda_max(risk.bound_m, gamma, slack);
  } catch (const ConfigError& e) {
    throw ConfigError("/risk/slater_slack", e.message() + " (gamma " + short_double(gamma) + ")");
  }
  risk.validate();
  return risk;
}

std::vector<MarketVector> load_markets(const MarketSection& section) {
  if (section.source == MarketSource::csv) {
    const PriceTable prices = load_prices(section.path);
    return to_relative(prices, section.market.bound);
  }
  return gen_markov(section.spec, section.days, section.market.bound).markets;
}

namespace {

struct Outcome {
  std::string label;
  std::string strategy;
  double gamma = 0.0;  // cann only
  bool ok = false;
  std::string error;
  std::vector<double> returns;
  json extra = json::object();
};

json cann_extra(const CannRun& run, double alpha, std::size_t window) {
  const std::size_t t = run.days.size();
  std::vector<double> omegas(t);
  double mean_omega = 0.0, mean_lambda = 0.0, mean_c = 0.0, hp = 0.0, hd = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    omegas[i] = run.days[i].omega;
    mean_omega += run.days[i].omega;
    mean_lambda += run.days[i].played.lambda;
    mean_c += run.days[i].played.c;
    hp += run.days[i].primal_entropy;
    hd += run.days[i].dual_entropy;
  }
  const double n = static_cast<double>(t);
  const std::vector<double> trailing = trailing_cvar(omegas, alpha, window);
  json j;
  j["mean_omega"] = mean_omega / n;
  j["mean_lambda"] = mean_lambda / n;
  j["mean_c"] = mean_c / n;
  j["mean_primal_entropy"] = hp / n;
  j["mean_dual_entropy"] = hd / n;
  j["trailing_cvar_window"] = window;
  j["final_trailing_cvar"] = trailing.back();
  j["max_trailing_cvar"] = *std::max_element(trailing.begin(), trailing.end());
  j["solver"] = {{"solves", run.diagnostics.solves},
                 {"nonconverged", run.diagnostics.nonconverged},
                 {"iterations", run.diagnostics.iterations},
                 {"worst_residual", run.diagnostics.worst_residual}};
  return j;
}

double number_param(const StrategySpec& s, const char* key, double fallback) {
  return s.params.contains(key) ? s.params.at(key).get<double>() : fallback;
}

std::string label_for(const StrategySpec& s, double gamma) {
  if (s.name == "cann") return "CANN_" + short_double(gamma);
  if (s.name == "bnn") return "BNN";
  if (s.name == "bnn_leveraged") return "BNN_L";
  std::string up = s.name;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  return up;
}

Outcome run_strategy(const ExperimentConfig& cfg, const StrategySpec& s, double gamma,
                     std::span<const MarketVector> markets, std::size_t inner_workers) {
  Outcome o;
  o.strategy = s.name;
  o.gamma = gamma;
  o.label = label_for(s, gamma);
  try {
    if (s.name == "cann") {
      const CannRun run = run_cann(markets, cfg.market.market, risk_for(cfg, gamma), cfg.grid,
                                   cfg.solver, inner_workers);
      for (const auto& d : run.days) o.returns.push_back(d.daily_return);
      o.extra = cann_extra(run, cfg.risk.alpha, cfg.output.cvar_window);
    } else if (s.name == "bcrp") {
      const std::vector<double> b = bcrp(markets);
      o.returns = crp_returns(markets, b);
      o.extra["portfolio"] = b;
    } else if (s.name == "eg") {
      o.returns = eg_run(markets, number_param(s, "eta", 0.05));
    } else if (s.name == "ons") {
      o.returns = ons_run(markets, number_param(s, "eta", 0.0), number_param(s, "beta", 1.0),
                          number_param(s, "delta", 0.125));
    } else if (s.name == "up") {
      const auto samples = static_cast<std::size_t>(number_param(s, "samples", 10000));
      o.returns = up_approx(markets, samples, cfg.seed);
    } else {
      NearestNeighborConfig nn;
      nn.grid = cfg.grid;
      nn.merge_quantum = cfg.solver.merge_quantum;
      nn.regularizer_scale = cfg.solver.regularizer_scale;
      nn.workers = inner_workers;
      if (s.name == "bnn") {
        o.returns = bnn_run(markets, nn);
      } else {
        nn.regularize = s.params.value("regularize", false);
        o.returns = bnn_leveraged_run(markets, nn, cfg.market.market);
      }
    }
    o.ok = true;
  } catch (const std::exception& e) {
    o.ok = false;
    o.error = e.what();
    o.returns.clear();
  }
  return o;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json summary_json(const Summary& s) {
  return {{"days", s.days},
          {"terminal_wealth", s.terminal_wealth},
          {"growth_rate", s.growth_rate},
          {"cvar", s.cvar},
          {"max_drawdown", s.max_drawdown},
          {"mean_return", s.mean_return}};
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg, RunMode mode) {
  MarketSection section = cfg.market;
  const std::vector<MarketVector> markets = load_markets(section);
  if (markets.empty()) throw DataError("the market has no days");

  struct Task {
    StrategySpec spec;
    double gamma;
    bool sweep;
  };
  std::vector<Task> tasks;
  if (mode == RunMode::run) {
    for (const auto& s : cfg.strategies)
      tasks.push_back({s, s.name == "cann" ? number_param(s, "gamma", cfg.risk.gamma) : 0.0, false});
  }
  for (double g : cfg.sweep_gammas) tasks.push_back({StrategySpec{"cann", json::object()}, g, true});

  // Validate every gamma before spending time on runs.
  for (const auto& t : tasks)
    if (t.spec.name == "cann") (void)risk_for(cfg, t.gamma);

  std::vector<Outcome> outcomes(tasks.size());
  const std::size_t outer = std::min(cfg.workers, std::max<std::size_t>(1, tasks.size()));
  const std::size_t inner = std::max<std::size_t>(1, cfg.workers / outer);
  {
    WorkerPool pool(outer);
    pool.for_each(tasks.size(), [&](std::size_t i) {
      outcomes[i] = run_strategy(cfg, tasks[i].spec, tasks[i].gamma, markets, inner);
      if (tasks[i].sweep) outcomes[i].label = "sweep_" + outcomes[i].label;
    });
  }

  const double alpha = cfg.risk.alpha;
  json report;
  report["version"] = kVersion;
  report["config_hash"] = config_hash(cfg.source);
  report["seed"] = cfg.seed;
  const RiskConfig base_risk = risk_for(cfg, cfg.risk.gamma);
  report["market"] = {{"name", section.name},
                      {"days", markets.size()},
                      {"assets", markets.front().size()},
                      {"B", section.market.bound},
                      {"r", section.market.rate},
                      {"L", section.market.leverage},
                      {"M", base_risk.bound_m}};
  report["risk"] = {{"alpha", alpha}, {"gamma", cfg.risk.gamma}, {"lambda_max", base_risk.lambda_max}};
  report["experts"] = {{"k_max", cfg.grid.k_max}, {"h_max", cfg.grid.h_max},
                       {"p", cfg.grid.schedule.fractions}};
  report["solver"] = {{"method", solver_method_name(cfg.solver.method)},
                      {"tol", cfg.solver.tol},
                      {"max_iters", cfg.solver.max_iters},
                      {"merge_quantum", cfg.solver.merge_quantum},
                      {"regularizer_scale", cfg.solver.regularizer_scale}};

  ExperimentOutput result;
  json strategies = json::array();
  json sweep = json::array();
  std::vector<const Outcome*> main_ok;
  std::vector<const Outcome*> all_ok;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Outcome& o = outcomes[i];
    json entry;
    entry["name"] = o.label;
    entry["strategy"] = o.strategy;
    if (o.strategy == "cann") entry["gamma"] = o.gamma;
    if (!o.ok) {
      entry["status"] = "failed";
      entry["error"] = o.error;
      result.exit_code = 3;
    } else {
      try {
        const Summary s = summarize(o.returns, alpha);
        entry["status"] = "ok";
        entry["summary"] = summary_json(s);
        all_ok.push_back(&o);
        if (!tasks[i].sweep) main_ok.push_back(&o);
      } catch (const std::exception& e) {
        entry["status"] = "failed";
        entry["error"] = e.what();
        result.exit_code = 3;
      }
    }
    if (!o.extra.empty()) entry["details"] = o.extra;
    (tasks[i].sweep ? sweep : strategies).push_back(entry);
  }
  report["strategies"] = strategies;
  report["sweep"] = sweep;

  std::filesystem::create_directories(cfg.output.dir);
  const auto& dir = cfg.output.dir;

  {  // wealth table: one row per dataset
    std::ostringstream csv;
    csv << "dataset";
    for (const Outcome* o : main_ok) csv << ',' << o->label;
    csv << '\n' << section.name;
    for (const Outcome* o : main_ok) csv << ',' << format_double(summarize(o->returns, alpha).terminal_wealth);
    csv << '\n';
    write_file(dir / "wealth_table.csv", csv.str());
  }
  {  // gamma sweep
    std::ostringstream csv;
    csv << "gamma,cvar,terminal_wealth,growth_rate,mean_return,max_drawdown\n";
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (!tasks[i].sweep || !outcomes[i].ok) continue;
      const Summary s = summarize(outcomes[i].returns, alpha);
      csv << format_double(tasks[i].gamma) << ',' << format_double(s.cvar) << ','
          << format_double(s.terminal_wealth) << ',' << format_double(s.growth_rate) << ','
          << format_double(s.mean_return) << ',' << format_double(s.max_drawdown) << '\n';
    }
    write_file(dir / "gamma_sweep.csv", csv.str());
  }
  {  // mean versus CVaR frontier
    std::ostringstream csv;
    csv << "strategy,gamma,mean_return,cvar\n";
    for (const Outcome* o : all_ok) {
      const Summary s = summarize(o->returns, alpha);
      csv << o->label << ',' << (o->strategy == "cann" ? format_double(o->gamma) : "") << ','
          << format_double(s.mean_return) << ',' << format_double(s.cvar) << '\n';
    }
    write_file(dir / "frontier.csv", csv.str());
  }
  {  // histogram of daily returns on a common grid
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Outcome* o : all_ok)
      for (double r : o->returns) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    const std::size_t bins = cfg.output.histogram_bins;
    if (!(hi > lo)) {
      hi = lo + 1e-12;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::vector<std::size_t>> counts(all_ok.size(), std::vector<std::size_t>(bins, 0));
    for (std::size_t k = 0; k < all_ok.size(); ++k)
      for (double r : all_ok[k]->returns) {
        auto b = static_cast<std::size_t>((r - lo) / width);
        counts[k][std::min(b, bins - 1)] += 1;
      }
    std::ostringstream csv;
    csv << "bin_lo,bin_hi";
    for (const Outcome* o : all_ok) csv << ',' << o->label;
    csv << '\n';
    if (!all_ok.empty()) {
      for (std::size_t b = 0; b < bins; ++b) {
        csv << format_double(lo + width * static_cast<double>(b)) << ','
            << format_double(b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1));
        for (std::size_t k = 0; k < all_ok.size(); ++k) csv << ',' << counts[k][b];
        csv << '\n';
      }
    }
    write_file(dir / "return_histogram.csv", csv.str());
  }
  {  // daily returns
    std::ostringstream csv;
    csv << "day";
    for (const Outcome* o : all_ok) csv << ',' << o->label;
    csv << '\n';
    for (std::size_t t = 0; t < markets.size(); ++t) {
      csv << t + 1;
      for (const Outcome* o : all_ok) csv << ',' << format_double(o->returns[t]);
      csv << '\n';
    }
    write_file(dir / "daily_returns.csv", csv.str());
  }
  report["files"] = {"report.json", "wealth_table.csv", "gamma_sweep.csv", "return_histogram.csv",
                     "frontier.csv", "daily_returns.csv"};
  write_file(dir / "report.json", report.dump(2) + "\n");
  result.report = std::move(report);
  return result;
}

}  // namespace cann
