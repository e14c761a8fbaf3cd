#pragma once

#include <vector>

#include "monotest/step_process.hpp"

namespace monotest {

// L1 discrepancy statistics for J monotone estimates against each other and
// against the pooled estimate:
//   s1 = sum_{i<j} int |f_i - f_j|,   s2 = sum_j int |f_j - f_0|.
struct TestStatistics {
  double s1 = 0.0;
  double s2 = 0.0;
  std::vector<double> pairwise;   // row-major upper triangle, i < j
  std::vector<double> vs_pooled;  // one entry per group
};

TestStatistics compute_statistics(const std::vector<MonotoneStepEstimate>& groups,
                                  const MonotoneStepEstimate& pooled, Interval on);

}  // namespace monotest
