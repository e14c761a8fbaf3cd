#pragma once

#include <cstddef>
#include <vector>

#include "monotest/models.hpp"
#include "monotest/step_process.hpp"

namespace monotest {

enum class BoundaryCorrection { boundary_kernel, local_linear };

// Triweight smoothing of a finite measure on [a,b]. Two sources:
//  - of_monotone: the measure with density given by a nonincreasing step
//    estimate; evaluation uses exact kernel partial moments at the jumps.
//  - of_cumulative: the atomic measure given by the jumps of a cumulative
//    step process (an empirical distribution, say).
// Within h of an endpoint, either a linearly corrected boundary kernel is
// used or the interior estimate is continued linearly from a+h resp. b-h.
class SmoothEstimate {
 public:
  static SmoothEstimate of_monotone(const MonotoneStepEstimate& estimate, double h,
                                    BoundaryCorrection correction);
  static SmoothEstimate of_cumulative(const CumulativeProcess& process, double h,
                                      BoundaryCorrection correction);

  double operator()(double t) const;
  double derivative(double t) const;

  const Interval& domain() const { return dom_; }
  double bandwidth() const { return h_; }
  BoundaryCorrection correction() const { return corr_; }
  bool smooths_step_density() const { return tail_form_; }

  // Locations carrying mass of the smoothed measure; integration code splits
  // quadrature panels at these positions shifted by +-h.
  const std::vector<double>& atom_positions() const { return pos_; }

 private:
  SmoothEstimate(Interval dom, double h, BoundaryCorrection corr, bool tail_form,
                 std::vector<double> pos, std::vector<double> weights);

  double combine(double t, int deriv) const;

  Interval dom_;
  double h_ = 0.0;
  BoundaryCorrection corr_ = BoundaryCorrection::boundary_kernel;
  bool tail_form_ = false;
  std::vector<double> pos_, w_, prefix_;
  double lo_val_ = 0.0, lo_slope_ = 0.0, hi_val_ = 0.0, hi_slope_ = 0.0;
};

// value(t) = (estimate(t) + shift) * scale.
struct CalibratedCurve {
  SmoothEstimate base;
  double shift = 0.0;
  double scale = 1.0;

  double operator()(double t) const { return (base(t) + shift) * scale; }
  double max_on_grid(std::size_t points) const;
};

// Shift the estimate up by its most negative value (if any) and rescale so it
// integrates to one over the domain: a proper density for resampling.
CalibratedCurve make_density(SmoothEstimate estimate);

// Shift up only, without normalization (hazard rates are not densities).
CalibratedCurve make_nonnegative(SmoothEstimate estimate);

// Exact integrals over the domain via Gauss-Legendre panels split at the
// atoms shifted by the bandwidth. power is 1 or 2.
double integrate(const SmoothEstimate& estimate, int power);

// Least-squares cross-validation score at the bandwidth baked into estimate:
//   int est^2 - 2n/(n-1) int est dPooled + 2 K(0) / ((n-1) h).
// pooled is the cumulative process whose jumps weight the second term and n
// is the pooled sample size.
double lscv(const SmoothEstimate& estimate, const CumulativeProcess& pooled, std::size_t n);

std::vector<double> default_bandwidth_grid(Interval domain, std::size_t count = 40);

// Grid minimizer of the LSCV score; ties resolve to the larger bandwidth.
double select_bandwidth(const MonotoneStepEstimate& source, BoundaryCorrection correction,
                        const CumulativeProcess& pooled, std::size_t n,
                        const std::vector<double>& grid);
double select_bandwidth(const CumulativeProcess& source, BoundaryCorrection correction,
                        const CumulativeProcess& pooled, std::size_t n,
                        const std::vector<double>& grid);

}  // namespace monotest
