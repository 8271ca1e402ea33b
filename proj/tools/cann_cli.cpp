// cann: run CANN and the benchmark strategies from a JSON config.
//
//   cann run <config.json> [--seed N] [--workers N] [--out-dir DIR]
//   cann sweep <config.json> --gamma 0.01,0.02,... [...]
//   cann gen <spec.json> --out prices.csv [--days N] [--seed N]
//
// Exit codes: 0 success, 1 config error, 2 data error, 3 some strategy failed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cann/config.hpp"
#include "cann/error.hpp"
#include "cann/experiment.hpp"

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cann::ConfigError("/", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw cann::ConfigError("/", path + ": " + e.what());
  }
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
};

// CLI flags win over the file; the config hash covers the result.
void apply(json& doc, const Overrides& o) {
  if (!doc.is_object()) throw cann::ConfigError("/", "expected an object");
  if (o.seed) {
    doc["seed"] = *o.seed;
    if (doc.contains("market") && doc["market"].is_object() &&
        doc["market"].value("source", "csv") != "csv")
      doc["market"]["seed"] = *o.seed;
  }
  if (o.workers) doc["workers"] = *o.workers;
  if (o.out_dir) {
    if (!doc.contains("output")) doc["output"] = json::object();
    doc["output"]["dir"] = *o.out_dir;
  }
}

int run_config(const std::string& path, const Overrides& o,
               const std::optional<std::vector<double>>& gammas, cann::RunMode mode) {
  json doc = read_json(path);
  apply(doc, o);
  if (gammas) doc["sweep"] = {{"gamma", *gammas}};
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  cann::ExperimentConfig cfg = cann::parse_config(doc, base);
  if (o.out_dir) cfg.output.dir = *o.out_dir;  // relative to the caller, not the config
  const cann::ExperimentOutput out = cann::run_experiment(cfg, mode);
  for (const auto& s : out.report["strategies"]) {
    std::cout << s["name"].get<std::string>() << ": ";
    if (s["status"] == "ok")
      std::cout << "wealth " << s["summary"]["terminal_wealth"].get<double>() << ", CVaR "
                << s["summary"]["cvar"].get<double>() << '\n';
    else
      std::cout << "FAILED " << s["error"].get<std::string>() << '\n';
  }
  for (const auto& s : out.report["sweep"]) {
    std::cout << "gamma " << s["gamma"].get<double>() << ": ";
    if (s["status"] == "ok")
      std::cout << "CVaR " << s["summary"]["cvar"].get<double>() << ", wealth "
                << s["summary"]["terminal_wealth"].get<double>() << '\n';
    else
      std::cout << "FAILED " << s["error"].get<std::string>() << '\n';
  }
  std::cout << "reports written to " << cfg.output.dir.string() << '\n';
  return out.exit_code;
}

int gen(const std::string& spec_path, const std::string& out_path, std::optional<std::size_t> days,
        std::optional<std::uint64_t> seed) {
  json doc = read_json(spec_path);
  if (days) doc["days"] = *days;
  if (seed) doc["seed"] = *seed;
  if (!doc.contains("source")) doc["source"] = doc.contains("transition") ? "markov" : "iid";
  const cann::MarketSection section =
      cann::parse_market_section(doc, "", std::filesystem::path(spec_path).parent_path());
  if (section.source == cann::MarketSource::csv)
    throw cann::ConfigError("/source", "gen needs a synthetic source (iid or markov)");
  const auto markets = cann::load_markets(section);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw cann::DataError("cannot write " + out_path);
  cann::write_prices(out, cann::default_asset_names(section.spec.assets()), markets);
  std::cout << "wrote " << markets.size() + 1 << " price rows to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-constrained online portfolio selection (CANN) backtester"};
  app.require_subcommand(1);

  Overrides o;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_dir;
  std::string config_path;
  std::vector<double> gammas;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", out_dir, "Directory for report files");
  };
  CLI::App* run = app.add_subcommand("run", "Run every configured strategy (and sweep)");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "Run CANN over a list of gamma values");
  add_common(sweep);
  sweep->add_option("--gamma", gammas, "Risk budgets")->delimiter(',')->required();

  CLI::App* gen_cmd = app.add_subcommand("gen", "Export a synthetic market as a price CSV");
  std::string spec_path, gen_out;
  std::size_t days = 0;
  gen_cmd->add_option("spec", spec_path, "Synthetic market spec (JSON)")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen_out, "Output CSV")->required();
  gen_cmd->add_option("--days", days, "Number of market days");
  gen_cmd->add_option("--seed", seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto seed_opt = [&](CLI::App* sub) -> std::optional<std::uint64_t> {
    if (sub->count("--seed")) return seed;
    return std::nullopt;
  };

  try {
    if (*gen_cmd) {
      return gen(spec_path, gen_out, gen_cmd->count("--days") ? std::optional(days) : std::nullopt,
                 seed_opt(gen_cmd));
    }
    CLI::App* sub = *run ? run : sweep;
    o.seed = seed_opt(sub);
    if (sub->count("--workers")) o.workers = workers;
    if (sub->count("--out-dir")) o.out_dir = out_dir;
    return run_config(config_path, o, *sweep ? std::optional(gammas) : std::nullopt,
                      *run ? cann::RunMode::run : cann::RunMode::sweep);
  } catch (const cann::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const cann::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const cann::DomainError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
