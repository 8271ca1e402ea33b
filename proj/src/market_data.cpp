#include "cann/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "cann/error.hpp"

namespace cann {
namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::string location(std::string_view source, std::size_t line, std::size_t col) {
  std::ostringstream os;
  os << source << ":" << line << ":" << col;
  return os.str();
}

}  // namespace

double default_leverage(double bound, double rate) { return 1.0 / (bound + rate); }

MarketConfig MarketConfig::with_default_leverage(double bound, double rate) {
  return MarketConfig{bound, rate, default_leverage(bound, rate)};
}

void MarketConfig::validate() const {
  if (!(bound > 0.0 && bound < 1.0)) throw ConfigError("/market/B", "must lie in (0, 1)");
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw ConfigError("/market/r", "must be >= 0");
  if (!(leverage >= 1.0) || !std::isfinite(leverage))
    throw ConfigError("/market/L", "must be >= 1");
}

PriceTable parse_prices(std::istream& in, std::string_view source) {
  PriceTable table;
  std::string line;
  std::size_t line_no = 0;
  // Header; skip a UTF-8 byte order mark and blank leading lines.
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError(std::string(source) + ": empty price file");
  for (auto cell : split_row(line)) table.assets.emplace_back(trim(cell));
  if (table.assets.empty()) throw DataError(std::string(source) + ": header has no assets");

  const std::size_t n = table.assets.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != n) {
      throw DataError(location(source, line_no, cells.size() + 1) + ": expected " +
                      std::to_string(n) + " prices, found " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::string_view cell = trim(cells[j]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw DataError(location(source, line_no, j + 1) + ": non-numeric price '" +
                        std::string(cell) + "'");
      }
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DataError(location(source, line_no, j + 1) + ": price must be strictly positive, got " +
                        std::string(cell));
      }
      table.values.push_back(v);
    }
  }
  return table;
}

PriceTable load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file '" + path.string() + "'");
  return parse_prices(in, path.string());
}

std::size_t clip_to_bound(MarketVector& x, double bound) {
  std::size_t clipped = 0;
  for (double& v : x.x) {
    const double c = std::clamp(v, 1.0 - bound, 1.0 + bound);
    clipped += (c != v);
    v = c;
  }
  return clipped;
}

std::vector<MarketVector> to_relative(const PriceTable& prices, double bound) {
  const std::size_t days = prices.n_days();
  const std::size_t n = prices.n_assets();
  if (days < 2) throw DataError("need at least two days of prices to form a market vector");
  std::vector<MarketVector> out;
  out.reserve(days - 1);
  for (std::size_t t = 0; t + 1 < days; ++t) {
    MarketVector mv;
    mv.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) mv.x[i] = prices.value(t + 1, i) / prices.value(t, i);
    clip_to_bound(mv, bound);
    out.push_back(std::move(mv));
  }
  return out;
}

TransformedVector transform(const MarketVector& x, double rate) {
  TransformedVector t;
  t.x.resize(2 * x.size() + 1);
  t.x[0] = 1.0 + rate;
  for (std::size_t i = 0; i < x.size(); ++i) {
    t.x[2 * i + 1] = x[i];
    t.x[2 * i + 2] = 2.0 - x[i] + rate;
  }
  return t;
}

MarketVector recover(const TransformedVector& xt) {
  MarketVector x;
  x.x.resize((xt.size() - 1) / 2);
  for (std::size_t i = 0; i < x.size(); ++i) x.x[i] = xt[2 * i + 1];
  return x;
}

void write_prices(std::ostream& out, std::span<const std::string> assets,
                  std::span<const MarketVector> markets, double start) {
  const std::size_t n = assets.size();
  for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << assets[i];
  out << "\n";
  std::vector<double> price(n, start);
  out << std::setprecision(17);
  for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << price[i];
  out << "\n";
  for (const auto& m : markets) {
    if (m.size() != n) throw DataError("market vector width does not match asset count");
    for (std::size_t i = 0; i < n; ++i) {
      price[i] *= m[i];
      out << (i ? "," : "") << price[i];
    }
    out << "\n";
  }
}

std::vector<std::string> default_asset_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("A" + std::to_string(i + 1));
  return names;
}

}  // namespace cann
