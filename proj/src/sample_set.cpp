#include "cann/sample_set.hpp"

#include <numeric>

#include "cann/error.hpp"

namespace cann {

SampleSet SampleSet::uniform(std::span<const TransformedVector> samples) {
  SampleSet set(samples.empty() ? 0 : samples.front().size());
  for (const auto& s : samples) set.add(s.x, 1.0);
  set.finalize();
  return set;
}

SampleSet SampleSet::uniform(std::span<const MarketVector> samples) {
  SampleSet set(samples.empty() ? 0 : samples.front().size());
  for (const auto& s : samples) set.add(s.x, 1.0);
  set.finalize();
  return set;
}

void SampleSet::clear() noexcept {
  rows_.clear();
  columns_.clear();
  weights_.clear();
}

void SampleSet::reserve(std::size_t samples) {
  rows_.reserve(samples * dim_);
  weights_.reserve(samples);
}

void SampleSet::add(std::span<const double> row, double weight) {
  if (row.size() != dim_) throw Error("sample width does not match the set's dimension");
  if (!(weight > 0.0)) throw Error("sample weights must be positive");
  rows_.insert(rows_.end(), row.begin(), row.end());
  weights_.push_back(weight);
}

void SampleSet::finalize() {
  const std::size_t m = weights_.size();
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& w : weights_) w /= total;
  columns_.resize(m * dim_);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < dim_; ++j) columns_[j * m + i] = rows_[i * dim_ + j];
}

std::vector<double> SampleSet::row(std::size_t sample) const {
  std::vector<double> r(dim_);
  for (std::size_t j = 0; j < dim_; ++j) r[j] = value(sample, j);
  return r;
}

}  // namespace cann
