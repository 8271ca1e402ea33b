#pragma once

// Growth-optimal allocation for a weighted sample:
//   maximise  sum_i w_i log(<b, x_i> - offset) - ridge |b|^2
// over {b >= 0, sum b = mass}.

#include <span>
#include <vector>

#include "cann/sample_set.hpp"

namespace cann {

struct LogOptimalParams {
  double mass = 1.0;
  double offset = 0.0;
  double ridge = 0.0;
  double tol = 1e-10;
  int max_iters = 500;
};

struct LogOptimalResult {
  std::vector<double> b;
  double value = 0.0;  // sum_i w_i log(<b, x_i> - offset)
  int iterations = 0;
  bool converged = false;
};

/// Interior-point Newton with a shrinking log barrier. Flat objectives come
/// back uniform (the barrier's centre). `warm` may be empty.
LogOptimalResult log_optimal(const SampleSet& samples, const LogOptimalParams& params,
                             std::span<const double> warm = {});

}  // namespace cann
