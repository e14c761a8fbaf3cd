#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "monotest/step_process.hpp"

namespace monotest {

struct DensitySample {
  std::string label;
  std::vector<double> x;
};

// Responses on the equispaced design t_i = a + (b-a) i / n, i = 1..n.
struct RegressionSample {
  std::string label;
  std::vector<double> y;
};

// Right-censored observations: x = min(T, Y), delta = 1{T <= Y}.
struct CensoredSample {
  std::string label;
  std::vector<double> x;
  std::vector<int> delta;
};

struct GroupWeights {
  std::vector<double> c;  // n_j / n
  std::vector<std::size_t> sizes;
  std::size_t total = 0;

  static GroupWeights from_sizes(const std::vector<std::size_t>& sizes);
  std::size_t group_count() const { return c.size(); }
};

// Empirical distribution function of x on `domain`; all points must lie in it.
CumulativeProcess empirical_cdf(const std::vector<double>& x, Interval domain);

// Cumulative sum diagram of regression responses: jumps by y_i / n at t_i.
CumulativeProcess regression_cumsum(const std::vector<double>& y, Interval domain);

// Nelson-Aalen cumulative hazard estimate restricted to [0, upper]. At tied
// times, failures are processed before censorings, each with the current
// risk set, so an uncensored tie of size d contributes sum_{j<d} 1/(r - j).
CumulativeProcess nelson_aalen(const CensoredSample& sample, double upper);

// Kaplan-Meier distribution estimate 1 - prod (1 - d_k / r_k) on [0, max x].
// With of_censoring the roles of failure and censoring are swapped. If mass
// is left after the largest observation, it is placed there so the estimate
// reaches one and can be sampled from.
CumulativeProcess kaplan_meier(const std::vector<double>& x, const std::vector<int>& delta,
                               bool of_censoring);

// Weighted pointwise combination sum_j c_j F_j over the union of breakpoints.
// All processes must share the same domain.
CumulativeProcess pool(const std::vector<CumulativeProcess>& processes, const GroupWeights& w);

}  // namespace monotest
