#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "monotest/rng.hpp"
#include "monotest/step_process.hpp"

namespace monotest {

// Random-walk approximation of two-sided Brownian motion on
// [-half_width, half_width], with W(0) = 0 at the center index.
struct BrownianGrid {
  double half_width = 5.0;
  double step = 0.005;
  std::vector<double> values;

  static BrownianGrid sample(double half_width, double step, RngStream& rng);

  std::size_t size() const { return values.size(); }
  double position(std::size_t k) const {
    return -half_width + step * static_cast<double>(k);
  }
  // Linear interpolation; throws "grid too narrow" outside the range.
  double at(double u) const;
};

// Grid supremum of u -> W(u + c) - u^2 with the rightmost maximizer on ties.
// Throws "grid too narrow" when the maximizer sits on the grid edge.
double simulate_zeta(const BrownianGrid& path, double c);

// Answers argmax_u { W(u+c) - u^2 } for many c against one path: build the
// upper concave hull of (v, W(v) - v^2) once, then locate the hull vertex
// whose incident slopes bracket -2c.
class ZetaSolver {
 public:
  explicit ZetaSolver(const BrownianGrid& path);
  ZetaSolver(std::vector<double> positions, const std::vector<double>& path_values);

  double zeta(double c) const;

 private:
  std::vector<double> vx_;      // hull vertex positions
  std::vector<double> slopes_;  // descending segment slopes
};

// Model ingredients for the limit constants: group fractions, cumulative
// curves L_j with derivatives, and the slope of the common monotone curve.
struct ModelFunctions {
  Interval domain{0.0, 1.0};
  std::vector<double> c;
  std::vector<std::function<double(double)>> L;
  std::vector<std::function<double(double)>> L_prime;
  std::function<double(double)> f0_prime;

  std::size_t group_count() const { return c.size(); }
};

// Scaled localized process at location s for group j:
//   y = scale * zeta(t / scale), scale = (L_j'(s) / c_j)^{1/3}.
double y_sj(double t, double s, std::size_t j, const ModelFunctions& mf,
            const std::function<double(double)>& zeta);

struct LimitConfig {
  std::size_t replications = 2000;
  std::size_t quad_points = 24;  // Gauss-Legendre nodes over the domain
  double t_cutoff = 2.5;         // truncation of the covariance integral
  std::size_t t_points = 16;     // Gauss-Legendre nodes on [0, t_cutoff]
  double grid_half_width = 5.0;  // enlarged automatically for shifted queries
  double grid_step = 0.005;
  std::uint64_t seed = 1;
  int threads = 0;
  std::size_t batches = 10;  // batch means for Monte Carlo standard errors
};

struct LimitConstants {
  double m1 = 0.0, m1_stderr = 0.0;
  double sigma1_sq = 0.0, sigma1_sq_stderr = 0.0;
  double m2 = 0.0, m2_stderr = 0.0;
  double sigma2_sq = 0.0, sigma2_sq_stderr = 0.0;
  // Domain-integrated covariance of the sigma1 integrand at the t cutoff,
  // with its standard error: a check that the truncation lost nothing.
  double tail_cov = 0.0, tail_cov_stderr = 0.0;
  bool proportional = false;
};

// Mean of the pairwise limit statistic.
LimitConstants estimate_m1(const ModelFunctions& mf, const LimitConfig& cfg);

// Variance parameter of the pairwise statistic, by covariance integration.
LimitConstants estimate_sigma1(const ModelFunctions& mf, const LimitConfig& cfg);

// Mean and variance parameters of the pooled-comparison statistic. The mean
// depends on n unless the L_j are proportional, in which case the shortcut
// combined-path representation is used and the result is n-free.
LimitConstants estimate_m2_sigma2(const ModelFunctions& mf, std::size_t n, const LimitConfig& cfg);

}  // namespace monotest
