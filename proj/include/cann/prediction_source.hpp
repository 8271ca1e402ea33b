#pragma once

#include <cstddef>
#include <vector>

#include "cann/market_data.hpp"
#include "cann/objective.hpp"

namespace cann {

/// A fixed set of experts that each propose a SaddleTriple for the next day.
class PredictionSource {
 public:
  virtual ~PredictionSource() = default;
  virtual std::size_t size() const = 0;
  /// Reveals the next market day.
  virtual void observe(const MarketVector& x) = 0;
  /// One triple per expert for the day after everything observed so far.
  virtual void predict(std::vector<SaddleTriple>& out) = 0;
};

}  // namespace cann
