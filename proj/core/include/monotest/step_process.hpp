#pragma once

#include <cstddef>
#include <vector>

namespace monotest {

struct Interval {
  double a = 0.0;
  double b = 1.0;
  double length() const { return b - a; }
  bool contains(double t) const { return t >= a && t <= b; }
};

// Right-continuous cumulative step process on [a,b]: equal to base_value on
// [a, breakpoints[0]) and to values[k] on [breakpoints[k], breakpoints[k+1]).
// Breakpoints are strictly increasing and lie inside [a,b].
class CumulativeProcess {
 public:
  CumulativeProcess(Interval domain, std::vector<double> breakpoints, std::vector<double> values,
                    double base_value = 0.0);

  double operator()(double t) const;

  const Interval& domain() const { return domain_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  double base_value() const { return base_; }
  double value_at_end() const { return values_.back(); }

 private:
  Interval domain_;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double base_ = 0.0;
};

// Piecewise-linear concave function on [a,b], stored by its vertices.
// knots.front() == a and knots.back() == b.
struct ConcaveMajorant {
  Interval domain;
  std::vector<double> knots;
  std::vector<double> knot_values;

  double operator()(double t) const;
};

// Left-continuous nonincreasing step function on [a,b]: equal to levels[k] on
// (jumps[k-1], jumps[k]] with jumps[-1] := a and jumps[m] := b, so there are
// m jump locations and m+1 levels. The value at a is taken as levels[0].
class MonotoneStepEstimate {
 public:
  MonotoneStepEstimate(Interval domain, std::vector<double> jump_locations,
                       std::vector<double> levels);

  double operator()(double t) const;

  const Interval& domain() const { return domain_; }
  const std::vector<double>& jump_locations() const { return jumps_; }
  const std::vector<double>& levels() const { return levels_; }
  std::size_t segment_count() const { return levels_.size(); }

  // Size of the downward jump at jump_locations()[k], a positive number.
  double jump_size(std::size_t k) const { return levels_[k] - levels_[k + 1]; }

  // sup{t in [a,b] : value(t) >= level}, with sup of the empty set = a.
  double generalized_inverse(double level) const;

 private:
  Interval domain_;
  std::vector<double> jumps_;
  std::vector<double> levels_;
};

// Least concave majorant: the pointwise-minimal concave function that
// dominates the process on its domain.
ConcaveMajorant lcm(const CumulativeProcess& process);

// Left-hand slope process of a concave majorant. Segments with equal slope
// are merged; the result has strictly decreasing levels.
MonotoneStepEstimate left_slopes(const ConcaveMajorant& majorant);

double generalized_inverse(const MonotoneStepEstimate& estimate, double level);

// Exact L1 distance between two step estimates over `on`, by merging the two
// breakpoint sets. `on` must be contained in both domains.
double l1_distance(const MonotoneStepEstimate& f, const MonotoneStepEstimate& g, Interval on);

// Integral over levels of |inverse_f - inverse_g|, again by breakpoint
// merging over the level axis. Equals l1_distance over the full domain.
double inverse_l1_distance(const MonotoneStepEstimate& f, const MonotoneStepEstimate& g);

namespace detail {

// Upper concave hull of a polyline with strictly increasing x. Collinear
// vertices (relative tolerance 1e-12 on the cross product) are merged.
void upper_hull(const std::vector<double>& x, const std::vector<double>& y,
                std::vector<double>& hull_x, std::vector<double>& hull_y);

}  // namespace detail

}  // namespace monotest
