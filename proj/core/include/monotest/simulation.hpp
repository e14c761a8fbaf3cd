#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "monotest/bootstrap.hpp"
#include "monotest/limit_theory.hpp"
#include "monotest/models.hpp"
#include "monotest/rng.hpp"

namespace monotest {

// Exponential density truncated to [0,3]: lambda * exp(-lambda x) / (1 - exp(-3 lambda)),
// degenerating to the uniform density 1/3 at lambda = 0.
class TruncExp {
 public:
  explicit TruncExp(double lambda);

  double lambda() const { return lambda_; }
  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  // d/dx pdf(x) = -lambda * pdf(x).
  double pdf_deriv(double x) const;

 private:
  double lambda_ = 0.0;
  double mass_ = 1.0;  // 1 - exp(-3 lambda)
};

std::vector<double> truncexp_sample(double lambda, std::size_t n, RngStream& rng);

// Limit-theory inputs for the null density model: every group shares the
// truncated exponential curve, so L_j = F and L_j' = f for all j.
ModelFunctions truncexp_null_model(double lambda, const std::vector<double>& weights);

// How the components of the pooled mixture are normalized before mixing.
// `normalized` scales every component to unit mass on [0,3] so the mixture is
// a genuine density with the group fractions as weights; `unit_exponential`
// keeps the components' native exponential normalizers 1 - exp(-lambda_j),
// reweighting the groups accordingly.
enum class MixtureWeights { normalized, unit_exponential };

class TruncExpMixture {
 public:
  TruncExpMixture(const std::vector<double>& lambdas, const std::vector<double>& fractions,
                  MixtureWeights mode);

  double pdf(double x) const;
  double sample(RngStream& rng) const;
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<TruncExp> comps_;
  std::vector<double> weights_;  // normalized to sum to one
  std::vector<double> cumw_;
};

enum class StatChoice { s1, s2, both };

struct SimConfig {
  std::vector<double> lambdas;     // one per group
  std::vector<std::size_t> sizes;  // n_j per group
  std::size_t repetitions = 500;
  std::size_t bootstrap = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::density_smooth;
  StatChoice stats = StatChoice::both;
  double bandwidth = 0.0;  // <= 0 selects by cross-validation each repetition
  BoundaryCorrection correction = BoundaryCorrection::boundary_kernel;
  int threads = 0;
};

struct LevelRow {
  double lambda = 0.0;
  std::size_t pooled_n = 0;  // total sample size across groups
  Scheme scheme = Scheme::density_smooth;
  StatKind stat = StatKind::s1;
  std::size_t rejections = 0;
  std::size_t repetitions = 0;
  double level = 0.0;
  double stderr_ = 0.0;
  double seconds = 0.0;
};

struct PowerPoint {
  double lambda3 = 0.0;
  Scheme scheme = Scheme::density_smooth;
  StatKind stat = StatKind::s1;
  std::size_t rejections = 0;
  std::size_t repetitions = 0;
  double power = 0.0;
  double stderr_ = 0.0;
  double seconds = 0.0;
};

struct TruePowerPoint {
  std::vector<double> lambdas;
  StatKind stat = StatKind::s1;
  double critical_value = 0.0;
  std::size_t rejections = 0;
  std::size_t repetitions = 0;
  double power = 0.0;
  double stderr_ = 0.0;
  MixtureWeights weights_mode = MixtureWeights::normalized;
};

// Null-hypothesis level study: all lambdas equal; each repetition draws the
// groups, runs the bootstrap test, and records the rejections. One row per
// selected statistic.
std::vector<LevelRow> run_level(const SimConfig& cfg);

// Alternative sweep: the last group's lambda runs over `lambda3_values`
// while the other groups keep cfg.lambdas; rejection frequency per point.
std::vector<PowerPoint> run_power(const SimConfig& cfg, const std::vector<double>& lambda3_values);

// Benchmark power against the least favorable null density (the pooled
// mixture of the alternative): phase one estimates the alpha-level critical
// value from mixture null draws, phase two the exceedance rate under the
// alternative. No bootstrap is involved.
std::vector<TruePowerPoint> true_power_benchmark(const std::vector<double>& lambdas,
                                                 const std::vector<std::size_t>& sizes,
                                                 std::size_t reps, double alpha,
                                                 std::uint64_t seed, MixtureWeights mode,
                                                 int threads = 0);

// Raw null-model statistic draws (no bootstrap), for scaling diagnostics.
struct StatDraws {
  std::vector<double> s1, s2;
};
StatDraws sample_null_statistics(double lambda, const std::vector<std::size_t>& sizes,
                                 std::size_t reps, std::uint64_t seed, int threads = 0);

std::string scheme_name(Scheme scheme);
std::string stat_name(StatKind stat);
std::string mixture_weights_name(MixtureWeights mode);

// CSV emission, "# monotest v1" header comment, %.12g numbers.
void write_level_csv(const std::vector<LevelRow>& rows, std::ostream& out);
void write_power_csv(const std::vector<PowerPoint>& rows, std::ostream& out);
void write_true_power_csv(const std::vector<TruePowerPoint>& rows, std::ostream& out);
void write_constants_csv(const LimitConstants& constants, const LimitConfig& cfg,
                         std::ostream& out);

}  // namespace monotest
