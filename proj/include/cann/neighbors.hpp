#pragma once

// Nearest-neighbour matching of k-day windows. Given N days of history, the
// query is the last k days; every earlier window X[i-k .. i-1] (k <= i < N)
// is a candidate, identified by its successor day i (0-based). The h-th
// matched set holds the successors of the floor(N * p_h) closest windows,
// ties broken by lower day index.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "cann/market_data.hpp"

namespace cann {

struct ExpertId {
  int k = 1;  // window length
  int h = 1;  // neighbour-fraction index
  friend bool operator==(const ExpertId&, const ExpertId&) = default;
};

/// p_h for h = 1..H; default p_h = 1/20 + (h-1)/18.
struct NeighborSchedule {
  std::vector<double> fractions;

  static NeighborSchedule standard(int h_max);
  double fraction(int h) const { return fractions.at(static_cast<std::size_t>(h - 1)); }
  /// floor(days * p_h)
  std::size_t neighbor_count(std::size_t days, int h) const;
  void validate() const;
};

/// The expert grid: k = 1..k_max, h = 1..h_max, flattened k-major.
struct ExpertGrid {
  int k_max = 5;
  int h_max = 10;
  NeighborSchedule schedule = NeighborSchedule::standard(10);

  std::size_t size() const noexcept { return static_cast<std::size_t>(k_max * h_max); }
  std::size_t index(ExpertId id) const noexcept {
    return static_cast<std::size_t>((id.k - 1) * h_max + (id.h - 1));
  }
  ExpertId id(std::size_t index) const noexcept {
    return {static_cast<int>(index) / h_max + 1, static_cast<int>(index) % h_max + 1};
  }
  void validate() const;
};

/// Successor-day indices of the `count` nearest windows, nearest first.
struct MatchedSet {
  std::vector<std::size_t> days;
  bool empty() const noexcept { return days.empty(); }
  std::size_t size() const noexcept { return days.size(); }
};

/// Direct evaluation: every distance computed from scratch, candidates fully
/// sorted by (distance, index). Reference path for the incremental sampler.
MatchedSet matched_set(std::span<const MarketVector> history, std::size_t k, std::size_t count);

/// matched_set with count = floor(N * p_h).
MatchedSet matched_set(std::span<const MarketVector> history, ExpertId id,
                       const NeighborSchedule& schedule);

/// Multiset of history days, compressed to distinct sample ids.
struct WeightedIds {
  std::vector<std::uint32_t> ids;
  std::vector<double> counts;
  bool empty() const noexcept { return ids.empty(); }
  double total() const noexcept;
};

/// Assigns `band[i]` = the smallest p such that candidate i is among the
/// counts[p] nearest (counts nondecreasing), or kNoBand. Ranking is by
/// (distance, index), the same order matched_set uses.
inline constexpr std::uint8_t kNoBand = 0xFF;
__extension__ typedef unsigned __int128 RankKey;
/// Orders candidates by (distance, index); distance must be >= 0, index < 2^32.
RankKey rank_key(double distance, std::size_t index) noexcept;
void nested_neighbor_bands(std::span<const double> distances, std::span<const std::size_t> counts,
                           std::span<std::uint8_t> band, std::vector<RankKey>& scratch);

/// Incremental matcher shared by every expert of a grid. Keeps the history
/// asset-major and extends window distances from k to k+1 with one SIMD pass
/// per asset. Days whose vectors agree within `merge_quantum` (exactly, when
/// 0) share a sample id, so matched sets come out as weighted ids.
class NeighborSampler {
 public:
  NeighborSampler(ExpertGrid grid, double merge_quantum = 0.0);

  void append(const MarketVector& x);
  std::size_t days() const noexcept { return days_; }
  std::size_t n_assets() const noexcept { return n_assets_; }
  const ExpertGrid& grid() const noexcept { return grid_; }

  std::uint32_t id_of_day(std::size_t day) const { return day_ids_.at(day); }
  const MarketVector& representative(std::uint32_t id) const { return representatives_.at(id); }
  std::size_t distinct() const noexcept { return representatives_.size(); }

  /// Matched sets for predicting day N (0-based) from days [0, N), one per
  /// expert in grid order. Empty for experts with no candidates. Ids come in
  /// first-seen order, not sorted.
  void matched(std::vector<WeightedIds>& out);

 private:
  std::uint32_t assign_id(const MarketVector& x);

  ExpertGrid grid_;
  double merge_quantum_;
  std::size_t n_assets_ = 0;
  std::size_t days_ = 0;
  std::vector<std::vector<double>> columns_;  // per asset, one entry per day
  std::vector<std::uint32_t> day_ids_;
  std::vector<MarketVector> representatives_;
  std::map<std::vector<std::int64_t>, std::uint32_t> quantized_ids_;
  std::map<std::vector<double>, std::uint32_t> exact_ids_;

  // scratch
  std::vector<double> distances_;
  std::vector<RankKey> select_scratch_;
  std::vector<std::uint8_t> bands_;
  std::vector<std::size_t> counts_;
  std::vector<double> id_counts_;
  std::vector<std::uint32_t> touched_;
};

}  // namespace cann
