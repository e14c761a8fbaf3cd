#include "monotest/step_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace monotest {

namespace {

void check_domain(const Interval& d) {
  if (!(d.a < d.b) || !std::isfinite(d.a) || !std::isfinite(d.b)) {
    throw std::invalid_argument("interval endpoints must be finite with a < b");
  }
}

}  // namespace

CumulativeProcess::CumulativeProcess(Interval domain, std::vector<double> breakpoints,
                                     std::vector<double> values, double base_value)
    : domain_(domain), breakpoints_(std::move(breakpoints)), values_(std::move(values)), base_(base_value) {
  check_domain(domain_);
  if (breakpoints_.size() != values_.size()) {
    throw std::invalid_argument("breakpoints and values must have equal length");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : breakpoints_) {
    if (!(t > prev)) throw std::invalid_argument("breakpoints must be strictly increasing");
    if (t < domain_.a || t > domain_.b) throw std::invalid_argument("breakpoint outside domain");
    prev = t;
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("process values must be finite");
  }
}

double CumulativeProcess::operator()(double t) const {
  if (t < domain_.a || t > domain_.b) throw std::out_of_range("evaluation outside domain");
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const auto idx = static_cast<std::size_t>(it - breakpoints_.begin());
  return idx == 0 ? base_ : values_[idx - 1];
}

double ConcaveMajorant::operator()(double t) const {
  if (t < domain.a || t > domain.b) throw std::out_of_range("evaluation outside domain");
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  auto idx = static_cast<std::size_t>(it - knots.begin());
  if (idx == 0) return knot_values.front();
  if (idx == knots.size()) return knot_values.back();
  const double x0 = knots[idx - 1], x1 = knots[idx];
  const double y0 = knot_values[idx - 1], y1 = knot_values[idx];
  const double w = (t - x0) / (x1 - x0);
  return y0 + w * (y1 - y0);
}

MonotoneStepEstimate::MonotoneStepEstimate(Interval domain, std::vector<double> jump_locations,
                                           std::vector<double> levels)
    : domain_(domain), jumps_(std::move(jump_locations)), levels_(std::move(levels)) {
  check_domain(domain_);
  if (levels_.size() != jumps_.size() + 1) {
    throw std::invalid_argument("levels must have one more entry than jump locations");
  }
  double prev = domain_.a;
  for (double t : jumps_) {
    if (!(t > prev) || !(t < domain_.b)) {
      throw std::invalid_argument("jump locations must be strictly increasing inside the domain");
    }
    prev = t;
  }
  for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
    if (!(levels_[k] > levels_[k + 1])) {
      throw std::invalid_argument("levels must be strictly decreasing across jumps");
    }
  }
  for (double v : levels_) {
    if (!std::isfinite(v)) throw std::invalid_argument("levels must be finite");
  }
}

double MonotoneStepEstimate::operator()(double t) const {
  if (t < domain_.a || t > domain_.b) throw std::out_of_range("evaluation outside domain");
  if (t == domain_.a) return levels_.front();
  const auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t);
  return levels_[static_cast<std::size_t>(it - jumps_.begin())];
}

double MonotoneStepEstimate::generalized_inverse(double level) const {
  // First segment index whose level drops below the target.
  const auto it = std::lower_bound(levels_.begin(), levels_.end(), level,
                                   [](double v, double lvl) { return v >= lvl; });
  const auto idx = static_cast<std::size_t>(it - levels_.begin());
  if (idx == 0) return domain_.a;
  if (idx == levels_.size()) return domain_.b;
  return jumps_[idx - 1];
}

double generalized_inverse(const MonotoneStepEstimate& estimate, double level) {
  return estimate.generalized_inverse(level);
}

namespace detail {

void upper_hull(const std::vector<double>& x, const std::vector<double>& y,
                std::vector<double>& hull_x, std::vector<double>& hull_y) {
  hull_x.clear();
  hull_y.clear();
  hull_x.reserve(x.size());
  hull_y.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Pop the middle vertex while it does not lie strictly above the chord.
    while (hull_x.size() >= 2) {
      const std::size_t t = hull_x.size();
      const double ax = hull_x[t - 2], ay = hull_y[t - 2];
      const double bx = hull_x[t - 1], by = hull_y[t - 1];
      const double lhs = (by - ay) * (x[i] - bx);
      const double rhs = (y[i] - by) * (bx - ax);
      const double cross = lhs - rhs;
      const double scale = std::abs(lhs) + std::abs(rhs);
      if (cross <= 1e-12 * scale) {
        hull_x.pop_back();
        hull_y.pop_back();
      } else {
        break;
      }
    }
    hull_x.push_back(x[i]);
    hull_y.push_back(y[i]);
  }
}

}  // namespace detail

ConcaveMajorant lcm(const CumulativeProcess& process) {
  const auto& bp = process.breakpoints();
  const auto& val = process.values();
  if (bp.empty()) throw std::invalid_argument("degenerate process: no breakpoints");
  const Interval dom = process.domain();

  std::vector<double> px, py;
  px.reserve(bp.size() + 2);
  py.reserve(bp.size() + 2);
  if (bp.front() > dom.a) {
    px.push_back(dom.a);
    py.push_back(process.base_value());
  }
  for (std::size_t k = 0; k < bp.size(); ++k) {
    // The pre-jump value is attained on [bp[k-1], bp[k]), so a majorant must
    // dominate it at bp[k] as well; relevant when values jump downward.
    double pre = k == 0 ? process.base_value() : val[k - 1];
    if (k == 0 && bp.front() == dom.a) pre = val.front();
    px.push_back(bp[k]);
    py.push_back(std::max(pre, val[k]));
  }
  if (bp.back() < dom.b) {
    px.push_back(dom.b);
    py.push_back(val.back());
  }

  ConcaveMajorant out;
  out.domain = dom;
  detail::upper_hull(px, py, out.knots, out.knot_values);
  return out;
}

MonotoneStepEstimate left_slopes(const ConcaveMajorant& majorant) {
  const auto& xs = majorant.knots;
  const auto& ys = majorant.knot_values;
  if (xs.size() < 2) {
    // Single-vertex majorant cannot arise from lcm(); treat as flat zero.
    throw std::invalid_argument("majorant must have at least one segment");
  }

  // Hull tolerance can leave adjacent slopes equal to rounding; merge those
  // runs so the level sequence is strictly decreasing.
  std::vector<std::size_t> start;  // left knot index of each retained segment
  std::vector<double> levels;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    std::size_t from = k - 1;
    double s = (ys[k] - ys[from]) / (xs[k] - xs[from]);
    while (!levels.empty()) {
      const double tol = 1e-12 * (1.0 + std::abs(s) + std::abs(levels.back()));
      if (s < levels.back() - tol) break;
      from = start.back();
      start.pop_back();
      levels.pop_back();
      s = (ys[k] - ys[from]) / (xs[k] - xs[from]);
    }
    start.push_back(from);
    levels.push_back(s);
  }

  std::vector<double> jumps;
  jumps.reserve(levels.size() - 1);
  for (std::size_t seg = 1; seg < start.size(); ++seg) jumps.push_back(xs[start[seg]]);
  return MonotoneStepEstimate(majorant.domain, std::move(jumps), std::move(levels));
}

double l1_distance(const MonotoneStepEstimate& f, const MonotoneStepEstimate& g, Interval on) {
  check_domain(on);
  if (on.a < f.domain().a || on.b > f.domain().b || on.a < g.domain().a || on.b > g.domain().b) {
    throw std::invalid_argument("integration interval must lie inside both domains");
  }
  const auto& fj = f.jump_locations();
  const auto& gj = g.jump_locations();
  auto fi = static_cast<std::size_t>(std::upper_bound(fj.begin(), fj.end(), on.a) - fj.begin());
  auto gi = static_cast<std::size_t>(std::upper_bound(gj.begin(), gj.end(), on.a) - gj.begin());

  double total = 0.0;
  double cur = on.a;
  const double inf = std::numeric_limits<double>::infinity();
  while (cur < on.b) {
    const double fnext = fi < fj.size() ? fj[fi] : inf;
    const double gnext = gi < gj.size() ? gj[gi] : inf;
    const double next = std::min({fnext, gnext, on.b});
    total += std::abs(f.levels()[fi] - g.levels()[gi]) * (next - cur);
    if (fnext == next) ++fi;
    if (gnext == next) ++gi;
    cur = next;
  }
  return total;
}

double inverse_l1_distance(const MonotoneStepEstimate& f, const MonotoneStepEstimate& g) {
  if (f.domain().a != g.domain().a || f.domain().b != g.domain().b) {
    throw std::invalid_argument("estimates must share a domain");
  }
  std::vector<double> levels;
  levels.reserve(f.levels().size() + g.levels().size());
  levels.insert(levels.end(), f.levels().begin(), f.levels().end());
  levels.insert(levels.end(), g.levels().begin(), g.levels().end());
  std::sort(levels.begin(), levels.end(), std::greater<>());

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const double hi = levels[k], lo = levels[k + 1];
    if (hi == lo) continue;
    total += std::abs(f.generalized_inverse(hi) - g.generalized_inverse(hi)) * (hi - lo);
  }
  return total;
}

}  // namespace monotest
