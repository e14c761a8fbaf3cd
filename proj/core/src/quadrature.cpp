#include "quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace monotest::quad {

std::vector<std::pair<double, double>> legendre(std::size_t k) {
  if (k == 0) throw std::invalid_argument("quadrature order must be positive");
  std::vector<std::pair<double, double>> out(k);
  const auto n = static_cast<double>(k);
  for (std::size_t i = 0; i < (k + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t m = 2; m <= k; ++m) {
        const double md = static_cast<double>(m);
        const double p2 = ((2.0 * md - 1.0) * x * p1 - (md - 1.0) * p0) / md;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[i] = {-std::abs(x), w};
    out[k - 1 - i] = {std::abs(x), w};
  }
  return out;
}

std::vector<std::pair<double, double>> legendre(std::size_t k, double lo, double hi) {
  auto base = legendre(k);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (auto& [x, w] : base) {
    x = mid + half * x;
    w *= half;
  }
  return base;
}

}  // namespace monotest::quad
