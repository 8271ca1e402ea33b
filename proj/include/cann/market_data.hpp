#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cann {

/// Relative prices of the n assets for one day (close_t / close_{t-1}).
struct MarketVector {
  std::vector<double> x;

  std::size_t size() const noexcept { return x.size(); }
  double operator[](std::size_t i) const { return x[i]; }
  friend bool operator==(const MarketVector&, const MarketVector&) = default;
};

/// The (2n+1)-vector (1+r, x_1, 2-x_1+r, ..., x_n, 2-x_n+r): cash, then a
/// long and a short instrument per asset.
struct TransformedVector {
  std::vector<double> x;

  std::size_t size() const noexcept { return x.size(); }
  double operator[](std::size_t i) const { return x[i]; }
  std::span<const double> view() const noexcept { return x; }
};

/// Leverage that makes the worst-case daily return exactly r: 1 / (B + r).
double default_leverage(double bound, double rate);

struct MarketConfig {
  double bound = 0.4;       // B: no relative price leaves [1-B, 1+B]
  double rate = 0.000245;   // r: daily interest on cash and borrowing
  double leverage = default_leverage(0.4, 0.000245);  // L: portfolio mass

  static MarketConfig with_default_leverage(double bound, double rate);

  /// (L-1)(1+r): the borrowing cost subtracted from <b, x'>.
  double offset() const noexcept { return (leverage - 1.0) * (1.0 + rate); }

  /// Throws ConfigError unless B in (0,1), r >= 0 and L >= 1.
  void validate() const;
};

/// Closing prices, day-major: value(t, i) is asset i on day t.
struct PriceTable {
  std::vector<std::string> assets;
  std::vector<double> values;

  std::size_t n_assets() const noexcept { return assets.size(); }
  std::size_t n_days() const noexcept { return assets.empty() ? 0 : values.size() / assets.size(); }
  double value(std::size_t day, std::size_t asset) const { return values[day * assets.size() + asset]; }
};

/// Parses a price CSV: a header of asset names, then one row of strictly
/// positive prices per day. Errors carry the 1-based line and column.
PriceTable parse_prices(std::istream& in, std::string_view source = "<stream>");
PriceTable load_prices(const std::filesystem::path& path);

/// Day-over-day ratios clipped componentwise to [1-B, 1+B]. Needs >= 2 days.
std::vector<MarketVector> to_relative(const PriceTable& prices, double bound);

TransformedVector transform(const MarketVector& x, double rate);

/// Inverse of transform: reads the long components back out.
MarketVector recover(const TransformedVector& xt);

/// Clips every component into [1-B, 1+B]; returns the number of clipped values.
std::size_t clip_to_bound(MarketVector& x, double bound);

/// Writes a price CSV whose relative prices are `markets`, starting at `start`.
void write_prices(std::ostream& out, std::span<const std::string> assets,
                  std::span<const MarketVector> markets, double start = 100.0);

/// Default asset names "A1".."An".
std::vector<std::string> default_asset_names(std::size_t n);

}  // namespace cann
