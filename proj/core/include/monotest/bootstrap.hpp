#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monotest/models.hpp"
#include "monotest/rng.hpp"
#include "monotest/smooth_estimate.hpp"
#include "monotest/statistics.hpp"
#include "monotest/step_process.hpp"

namespace monotest {

enum class Scheme { density_smooth, density_grenander, regression_residual, hazard };
enum class StatKind { s1, s2 };
enum class CensoringSource { groupwise, pooled };

struct BootstrapConfig {
  Scheme scheme = Scheme::density_smooth;
  std::size_t replications = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  double bandwidth = 0.0;  // <= 0 selects by cross-validation
  BoundaryCorrection correction = BoundaryCorrection::boundary_kernel;
  CensoringSource censoring = CensoringSource::groupwise;  // hazard scheme only
  int threads = 0;
};

struct BootstrapSummary {
  std::size_t count = 0;
  double mean = 0.0, q50 = 0.0, q90 = 0.0, q95 = 0.0, q99 = 0.0;
};

struct TestReport {
  StatKind kind = StatKind::s1;
  double observed = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  bool theory_supported = true;
  std::string note;
  BootstrapSummary draws;
};

struct ReferenceInfo {
  double bandwidth = 0.0;
  bool bandwidth_selected = false;
  BoundaryCorrection correction = BoundaryCorrection::boundary_kernel;
  double shift = 0.0;
  double scale = 1.0;
  double acceptance_rate = 1.0;  // uniform-proposal rejection sampler
};

struct KSampleResult {
  TestStatistics observed;
  std::vector<double> draws_s1, draws_s2;
  TestReport s1, s2;
  ReferenceInfo reference;
  Interval domain{0.0, 1.0};
  GroupWeights weights;
};

// Null reference for the density schemes: either a calibrated smooth density
// or the pooled step estimate itself (the no-smoothing variant).
struct DensityReference {
  std::optional<CalibratedCurve> curve;
  std::optional<MonotoneStepEstimate> step;
  double envelope = 0.0;         // rejection bound for the smooth sampler
  double acceptance_rate = 1.0;  // deterministic: 1 / (envelope * (b-a))
  // Inverse-distribution tables for the step variant.
  std::vector<double> edges, cum, levels;
};

DensityReference make_density_reference(const CalibratedCurve& curve, Interval domain);
DensityReference make_density_reference(const MonotoneStepEstimate& step);

// One draw from the reference density.
double sample_density_reference(const DensityReference& ref, Interval domain, RngStream& rng);

// Event-time sampler for a hazard rate on [0, upper]: the cumulative hazard is
// tabulated by the trapezoid rule and inverted against a unit exponential.
// Draws past the window come back as {upper, false} (censored at the edge).
class HazardSampler {
 public:
  HazardSampler(const CalibratedCurve& rate, double upper);

  // {event time, event indicator}.
  std::pair<double, bool> draw(RngStream& rng) const;

  double cumulative_at(double x) const;
  double total() const { return cum_.back(); }
  double upper() const { return upper_; }

 private:
  double upper_ = 0.0;
  double dt_ = 0.0;
  std::vector<double> cum_;
};

// Ascending order statistic at index ceil(B(1-alpha)).
double critical_value(std::vector<double> draws, double alpha);

// p = (1 + #{draws >= observed}) / (B + 1); reject iff observed exceeds the
// critical value strictly.
TestReport decide(StatKind kind, double observed, const std::vector<double>& draws, double alpha);

// Replication r of every generator below uses the substream (seed, r), so
// results are independent of the worker count.
std::vector<TestStatistics> bootstrap_density(const std::vector<std::size_t>& sizes,
                                              Interval domain, const DensityReference& ref,
                                              const BootstrapConfig& cfg);
std::vector<TestStatistics> bootstrap_regression(const std::vector<RegressionSample>& samples,
                                                 Interval domain, const CalibratedCurve& reference,
                                                 const BootstrapConfig& cfg);
std::vector<TestStatistics> bootstrap_hazard(const std::vector<CensoredSample>& samples,
                                             double upper, const CalibratedCurve& reference,
                                             const BootstrapConfig& cfg);

// Full pipelines: estimate, calibrate the null reference, bootstrap, decide.
KSampleResult density_test(const std::vector<DensitySample>& samples, Interval domain,
                           const BootstrapConfig& cfg);
KSampleResult regression_test(const std::vector<RegressionSample>& samples, Interval domain,
                              const BootstrapConfig& cfg);
KSampleResult hazard_test(const std::vector<CensoredSample>& samples, double upper,
                          const BootstrapConfig& cfg);

}  // namespace monotest
