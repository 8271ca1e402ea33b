#include "cann/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "cann/error.hpp"
#include "cann/simd/kernels.hpp"

namespace cann {

NeighborSchedule NeighborSchedule::standard(int h_max) {
  NeighborSchedule s;
  for (int h = 1; h <= h_max; ++h) s.fractions.push_back(1.0 / 20.0 + (h - 1) / 18.0);
  return s;
}

std::size_t NeighborSchedule::neighbor_count(std::size_t days, int h) const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(days) * fraction(h)));
}

void NeighborSchedule::validate() const {
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] < 1.0))
      throw ConfigError("/experts/p/" + std::to_string(i), "neighbour fraction must lie in (0, 1)");
  }
}

void ExpertGrid::validate() const {
  if (k_max < 1) throw ConfigError("/experts/k_max", "must be >= 1");
  if (h_max < 1 || h_max > 250) throw ConfigError("/experts/h_max", "must lie in [1, 250]");
  if (schedule.fractions.size() != static_cast<std::size_t>(h_max))
    throw ConfigError("/experts/p", "needs exactly h_max fractions");
  schedule.validate();
}

MatchedSet matched_set(std::span<const MarketVector> history, std::size_t k, std::size_t count) {
  MatchedSet out;
  const std::size_t n_days = history.size();
  if (k == 0 || n_days <= k || count == 0) return out;
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = k; i < n_days; ++i) {
    double d = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      const auto& cand = history[i - j];
      const auto& query = history[n_days - j];
      for (std::size_t a = 0; a < cand.size(); ++a) d += (cand[a] - query[a]) * (cand[a] - query[a]);
    }
    ranked.emplace_back(d, i);
  }
  std::sort(ranked.begin(), ranked.end());
  const std::size_t take = std::min(count, ranked.size());
  for (std::size_t i = 0; i < take; ++i) out.days.push_back(ranked[i].second);
  return out;
}

MatchedSet matched_set(std::span<const MarketVector> history, ExpertId id,
                       const NeighborSchedule& schedule) {
  return matched_set(history, static_cast<std::size_t>(id.k),
                     schedule.neighbor_count(history.size(), id.h));
}

RankKey rank_key(double distance, std::size_t index) noexcept {
  std::uint64_t bits;
  std::memcpy(&bits, &distance, sizeof bits);
  return (static_cast<RankKey>(bits) << 32) | static_cast<RankKey>(index);
}

double WeightedIds::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

void nested_neighbor_bands(std::span<const double> dist, std::span<const std::size_t> counts,
                           std::span<std::uint8_t> band, std::vector<RankKey>& scratch) {
  const std::size_t n = dist.size();
  const std::size_t n_bands = counts.size();
  std::fill(band.begin(), band.end(), kNoBand);
  if (n == 0 || n_bands == 0) return;

  // Rank order is (distance, index). Nonnegative doubles order like their bit
  // patterns, so (bits << 32 | index) is a single integer key.
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch[i] = rank_key(dist[i], i);

  // Cut-off key of band p is the one at rank counts[p]-1; select from the
  // largest band down on shrinking prefixes.
  std::vector<RankKey> cutoff;
  std::size_t first_band = n_bands;
  std::size_t active = n;
  std::vector<RankKey> reversed;
  for (std::size_t p = n_bands; p-- > 0;) {
    const std::size_t want = std::min(counts[p], active);
    if (want == 0) break;
    auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(want - 1);
    std::nth_element(scratch.begin(), nth, scratch.begin() + static_cast<std::ptrdiff_t>(active));
    reversed.push_back(*nth);
    first_band = p;
    active = want;
  }
  cutoff.assign(reversed.rbegin(), reversed.rend());  // bands first_band..n_bands-1
  if (cutoff.empty()) return;
  for (std::size_t i = 0; i < n; ++i) {
    const RankKey key = rank_key(dist[i], i);
    if (key > cutoff.back()) continue;
    const auto it = std::lower_bound(cutoff.begin(), cutoff.end(), key);
    band[i] = static_cast<std::uint8_t>(first_band + static_cast<std::size_t>(it - cutoff.begin()));
  }
}

NeighborSampler::NeighborSampler(ExpertGrid grid, double merge_quantum)
    : grid_(std::move(grid)), merge_quantum_(merge_quantum) {
  grid_.validate();
  if (!(merge_quantum_ >= 0.0)) throw ConfigError("/solver/merge_quantum", "must be >= 0");
}

std::uint32_t NeighborSampler::assign_id(const MarketVector& x) {
  const auto next = static_cast<std::uint32_t>(representatives_.size());
  if (merge_quantum_ > 0.0) {
    std::vector<std::int64_t> key(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) key[a] = std::llround(x[a] / merge_quantum_);
    const auto [it, inserted] = quantized_ids_.try_emplace(std::move(key), next);
    if (inserted) representatives_.push_back(x);
    return it->second;
  }
  const auto [it, inserted] = exact_ids_.try_emplace(x.x, next);
  if (inserted) representatives_.push_back(x);
  return it->second;
}

void NeighborSampler::append(const MarketVector& x) {
  if (days_ == 0) {
    n_assets_ = x.size();
    columns_.assign(n_assets_, {});
  } else if (x.size() != n_assets_) {
    throw DataError("day " + std::to_string(days_ + 1) + ": market vector has " +
                    std::to_string(x.size()) + " assets, expected " + std::to_string(n_assets_));
  }
  for (std::size_t a = 0; a < n_assets_; ++a) columns_[a].push_back(x[a]);
  day_ids_.push_back(assign_id(x));
  ++days_;
}

void NeighborSampler::matched(std::vector<WeightedIds>& out) {
  const std::size_t n_days = days_;
  const auto k_max = static_cast<std::size_t>(grid_.k_max);
  const auto h_max = static_cast<std::size_t>(grid_.h_max);
  out.resize(grid_.size());
  for (auto& w : out) {
    w.ids.clear();
    w.counts.clear();
  }
  if (n_days == 0) return;

  // Bands are built in ascending count order; remember which h each maps to.
  std::vector<std::size_t> h_order(h_max);
  std::iota(h_order.begin(), h_order.end(), std::size_t{0});
  std::stable_sort(h_order.begin(), h_order.end(), [&](std::size_t a, std::size_t b) {
    return grid_.schedule.fractions[a] < grid_.schedule.fractions[b];
  });

  distances_.assign(n_days, 0.0);
  id_counts_.resize(representatives_.size());
  std::fill(id_counts_.begin(), id_counts_.end(), 0.0);

  for (std::size_t k = 1; k <= k_max && k < n_days; ++k) {
    // Window distance for successor i grows by |X[i-k] - X[N-k]|^2.
    const std::size_t n_cand = n_days - k;
    for (std::size_t a = 0; a < n_assets_; ++a) {
      simd::accumulate_squared_diff(std::span<double>(distances_).subspan(k, n_cand),
                                    std::span<const double>(columns_[a]).first(n_cand),
                                    columns_[a][n_days - k]);
    }
    counts_.resize(h_max);
    for (std::size_t p = 0; p < h_max; ++p)
      counts_[p] = grid_.schedule.neighbor_count(n_days, static_cast<int>(h_order[p] + 1));
    bands_.resize(n_cand);
    nested_neighbor_bands(std::span<const double>(distances_).subspan(k, n_cand), counts_, bands_,
                          select_scratch_);

    // Bucket candidates by band, then sweep bands in order accumulating counts.
    std::vector<std::vector<std::uint32_t>> by_band(h_max);
    for (std::size_t c = 0; c < n_cand; ++c)
      if (bands_[c] != kNoBand) by_band[bands_[c]].push_back(day_ids_[k + c]);
    touched_.clear();
    for (std::size_t p = 0; p < h_max; ++p) {
      for (std::uint32_t id : by_band[p]) {
        if (id_counts_[id] == 0.0) touched_.push_back(id);
        id_counts_[id] += 1.0;
      }
      WeightedIds& dst =
          out[grid_.index({static_cast<int>(k), static_cast<int>(h_order[p] + 1)})];
      if (counts_[p] == 0) continue;
      dst.ids = touched_;
      dst.counts.resize(touched_.size());
      for (std::size_t j = 0; j < touched_.size(); ++j) dst.counts[j] = id_counts_[touched_[j]];
    }
    for (std::uint32_t id : touched_) id_counts_[id] = 0.0;
  }
}

}  // namespace cann
