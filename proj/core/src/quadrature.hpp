#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace monotest::quad {

// Gauss-Legendre nodes and weights, computed by Newton iteration on the
// Legendre recurrence.
std::vector<std::pair<double, double>> legendre(std::size_t k);
std::vector<std::pair<double, double>> legendre(std::size_t k, double lo, double hi);

}  // namespace monotest::quad
