#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cann/market_data.hpp"

namespace cann {

/// Weighted sample of vectors of equal width, stored instrument-major so the
/// per-instrument columns feed the SIMD kernels directly. Weights are
/// normalised to sum to one.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::size_t dim) : dim_(dim) {}

  /// Uniformly weighted set.
  static SampleSet uniform(std::span<const TransformedVector> samples);
  static SampleSet uniform(std::span<const MarketVector> samples);

  void clear() noexcept;
  void reserve(std::size_t samples);
  /// Appends a row with an unnormalised weight; call finalize() before use.
  void add(std::span<const double> row, double weight);
  void finalize();

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  bool empty() const noexcept { return weights_.empty(); }

  std::span<const double> column(std::size_t j) const {
    return {columns_.data() + j * size(), size()};
  }
  std::span<const double> weights() const noexcept { return weights_; }
  double value(std::size_t sample, std::size_t j) const { return columns_[j * size() + sample]; }
  std::vector<double> row(std::size_t sample) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> rows_;
  std::vector<double> columns_;
  std::vector<double> weights_;
};

}  // namespace cann
