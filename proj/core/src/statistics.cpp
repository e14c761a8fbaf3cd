#include "monotest/statistics.hpp"

#include <stdexcept>

namespace monotest {

TestStatistics compute_statistics(const std::vector<MonotoneStepEstimate>& groups,
                                  const MonotoneStepEstimate& pooled, Interval on) {
  if (groups.size() < 2) throw std::invalid_argument("at least two groups are required");
  TestStatistics out;
  out.pairwise.reserve(groups.size() * (groups.size() - 1) / 2);
  out.vs_pooled.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const double d = l1_distance(groups[i], groups[j], on);
      out.pairwise.push_back(d);
      out.s1 += d;
    }
  }
  for (const auto& g : groups) {
    const double d = l1_distance(g, pooled, on);
    out.vs_pooled.push_back(d);
    out.s2 += d;
  }
  return out;
}

}  // namespace monotest
