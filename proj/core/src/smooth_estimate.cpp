#include "monotest/smooth_estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <type_traits>

#include "monotest/kernel.hpp"

namespace monotest {

namespace {

constexpr double kGl8X[4] = {0.18343464249564980494, 0.52553240991632898582,
                             0.79666647741362673959, 0.96028985649753623168};
constexpr double kGl8W[4] = {0.36268378337836198297, 0.31370664587788728734,
                             0.22238103445337447054, 0.10122853629037625915};
constexpr double kGl16X[8] = {0.09501250983763744019, 0.28160355077925891323,
                              0.45801677765722738634, 0.61787624440264374845,
                              0.75540440835500303390, 0.86563120238783174388,
                              0.94457502307323257608, 0.98940093499164993260};
constexpr double kGl16W[8] = {0.18945061045506849629, 0.18260341504492358887,
                              0.16915651939500253819, 0.14959598881657673208,
                              0.12462897125553387205, 0.09515851168249278481,
                              0.06225352393864789286, 0.02715245941175409485};

template <typename F>
double gauss_legendre(const F& f, double u, double v, bool fine) {
  const double mid = 0.5 * (u + v);
  const double half = 0.5 * (v - u);
  double sum = 0.0;
  if (fine) {
    for (int i = 0; i < 8; ++i) {
      sum += kGl16W[i] * (f(mid + half * kGl16X[i]) + f(mid - half * kGl16X[i]));
    }
  } else {
    for (int i = 0; i < 4; ++i) {
      sum += kGl8W[i] * (f(mid + half * kGl8X[i]) + f(mid - half * kGl8X[i]));
    }
  }
  return half * sum;
}

}  // namespace

SmoothEstimate::SmoothEstimate(Interval dom, double h, BoundaryCorrection corr, bool tail_form,
                               std::vector<double> pos, std::vector<double> weights)
    : dom_(dom), h_(h), corr_(corr), tail_form_(tail_form), pos_(std::move(pos)), w_(std::move(weights)) {
  if (!(h_ > 0.0) || !(2.0 * h_ < dom_.length())) {
    throw std::invalid_argument("bandwidth must satisfy 0 < 2h < b - a");
  }
  prefix_.resize(w_.size() + 1, 0.0);
  for (std::size_t k = 0; k < w_.size(); ++k) prefix_[k + 1] = prefix_[k] + w_[k];
  // Anchors for the linear continuation; both points are interior.
  lo_val_ = combine(dom_.a + h_, 0);
  lo_slope_ = combine(dom_.a + h_, 1);
  hi_val_ = combine(dom_.b - h_, 0);
  hi_slope_ = combine(dom_.b - h_, 1);
}

SmoothEstimate SmoothEstimate::of_monotone(const MonotoneStepEstimate& estimate, double h,
                                           BoundaryCorrection correction) {
  const Interval dom = estimate.domain();
  const auto& jumps = estimate.jump_locations();
  const auto& levels = estimate.levels();
  std::vector<double> pos, w;
  pos.reserve(jumps.size() + 2);
  w.reserve(jumps.size() + 2);
  pos.push_back(dom.a);
  w.push_back(levels.front());
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    pos.push_back(jumps[k]);
    w.push_back(-(levels[k] - levels[k + 1]));
  }
  pos.push_back(dom.b);
  w.push_back(-levels.back());
  return SmoothEstimate(dom, h, correction, true, std::move(pos), std::move(w));
}

SmoothEstimate SmoothEstimate::of_cumulative(const CumulativeProcess& process, double h,
                                             BoundaryCorrection correction) {
  const auto& bp = process.breakpoints();
  const auto& val = process.values();
  if (bp.empty()) throw std::invalid_argument("degenerate process: no breakpoints");
  std::vector<double> pos = bp, w(bp.size());
  double prev = process.base_value();
  for (std::size_t k = 0; k < bp.size(); ++k) {
    w[k] = val[k] - prev;
    prev = val[k];
  }
  return SmoothEstimate(process.domain(), h, correction, false, std::move(pos), std::move(w));
}

double SmoothEstimate::combine(double t, int deriv) const {
  enum { kLeft, kInterior, kRight } region = kInterior;
  if (t < dom_.a + h_) {
    region = kLeft;
  } else if (t > dom_.b - h_) {
    region = kRight;
  }

  if (corr_ == BoundaryCorrection::local_linear && region != kInterior) {
    if (region == kLeft) {
      return deriv == 0 ? lo_val_ + lo_slope_ * (t - (dom_.a + h_)) : lo_slope_;
    }
    return deriv == 0 ? hi_val_ + hi_slope_ * (t - (dom_.b - h_)) : hi_slope_;
  }

  kernel::BoundaryCoefficients bc{1.0, 0.0}, dbc{0.0, 0.0};
  double sgn = 0.0;  // sign of ds/dt * h in the strips
  if (region == kLeft) {
    const double s = (t - dom_.a) / h_;
    bc = kernel::boundary_coeffs(s);
    if (deriv == 1) dbc = kernel::boundary_coeffs_deriv(s);
    sgn = 1.0;
  } else if (region == kRight) {
    const double s = (dom_.b - t) / h_;
    bc = kernel::boundary_coeffs(s);
    if (deriv == 1) dbc = kernel::boundary_coeffs_deriv(s);
    sgn = -1.0;
  }
  // In the right strip the corrected kernel is (phi - psi u) K(u).
  const double psi_sign = region == kRight ? -1.0 : 1.0;

  const auto lo = static_cast<std::size_t>(
      std::upper_bound(pos_.begin(), pos_.end(), t - h_) - pos_.begin());
  const auto hi = static_cast<std::size_t>(
      std::lower_bound(pos_.begin(), pos_.end(), t + h_) - pos_.begin());

  double acc = 0.0;
  if (tail_form_) {
    // Saturated part: partial moments at sigma >= 1.
    const double saturated = prefix_[lo];
    if (deriv == 0) {
      acc += saturated * bc.phi;  // m0 -> 1, m1 -> 0
      for (std::size_t k = lo; k < hi; ++k) {
        const double sig = (t - pos_[k]) / h_;
        acc += w_[k] * (bc.phi * kernel::moment(0, sig) + psi_sign * bc.psi * kernel::moment(1, sig));
      }
    } else {
      acc += saturated * sgn * dbc.phi;
      for (std::size_t k = lo; k < hi; ++k) {
        const double sig = (t - pos_[k]) / h_;
        const double kv = kernel::triweight(sig);
        acc += w_[k] * (sgn * (dbc.phi * kernel::moment(0, sig) +
                               psi_sign * dbc.psi * kernel::moment(1, sig)) +
                        (bc.phi + psi_sign * bc.psi * sig) * kv);
      }
      acc /= h_;
    }
  } else {
    if (deriv == 0) {
      for (std::size_t k = lo; k < hi; ++k) {
        const double u = (t - pos_[k]) / h_;
        acc += w_[k] * (bc.phi + psi_sign * bc.psi * u) * kernel::triweight(u);
      }
      acc /= h_;
    } else {
      for (std::size_t k = lo; k < hi; ++k) {
        const double u = (t - pos_[k]) / h_;
        const double kv = kernel::triweight(u);
        const double kd = kernel::triweight_deriv(u);
        acc += w_[k] * ((sgn * (dbc.phi + psi_sign * dbc.psi * u) + psi_sign * bc.psi) * kv +
                        (bc.phi + psi_sign * bc.psi * u) * kd);
      }
      acc /= h_ * h_;
    }
  }
  return acc;
}

double SmoothEstimate::operator()(double t) const {
  if (t < dom_.a || t > dom_.b) throw std::out_of_range("evaluation outside domain");
  return combine(t, 0);
}

double SmoothEstimate::derivative(double t) const {
  if (t < dom_.a || t > dom_.b) throw std::out_of_range("evaluation outside domain");
  return combine(t, 1);
}

double CalibratedCurve::max_on_grid(std::size_t points) const {
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  const Interval dom = base.domain();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points; ++i) {
    const double t =
        dom.a + dom.length() * static_cast<double>(i) / static_cast<double>(points - 1);
    best = std::max(best, (*this)(t));
  }
  return best;
}

double integrate(const SmoothEstimate& estimate, int power) {
  if (power != 1 && power != 2) throw std::invalid_argument("power must be 1 or 2");
  const Interval dom = estimate.domain();
  const double h = estimate.bandwidth();

  std::vector<double> knots{dom.a, dom.a + h, dom.b - h, dom.b};
  for (double p : estimate.atom_positions()) {
    for (double q : {p - h, p + h}) {
      if (q > dom.a && q < dom.b) knots.push_back(q);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  const bool rational_strips = estimate.correction() == BoundaryCorrection::boundary_kernel;
  auto f = [&](double t) {
    const double v = estimate(t);
    return power == 1 ? v : v * v;
  };

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double u = knots[k], v = knots[k + 1];
    if (!(v > u)) continue;
    const bool strip = v <= dom.a + h || u >= dom.b - h;
    if (strip && rational_strips) {
      // The correction coefficients are rational in t here; refine.
      for (int piece = 0; piece < 4; ++piece) {
        const double pu = u + (v - u) * piece / 4.0;
        const double pv = u + (v - u) * (piece + 1) / 4.0;
        total += gauss_legendre(f, pu, pv, true);
      }
    } else {
      total += gauss_legendre(f, u, v, false);
    }
  }
  return total;
}

CalibratedCurve make_density(SmoothEstimate estimate) {
  const Interval dom = estimate.domain();
  constexpr std::size_t kGrid = 40001;  // contains every 10^4-point check grid
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double t = dom.a + dom.length() * static_cast<double>(i) / (kGrid - 1);
    lowest = std::min(lowest, estimate(t));
  }
  const double shift = lowest < 0.0 ? -lowest : 0.0;
  const double mass = integrate(estimate, 1) + shift * dom.length();
  if (!(mass > 0.0)) throw std::runtime_error("degenerate estimate: nonpositive total mass");
  return CalibratedCurve{std::move(estimate), shift, 1.0 / mass};
}

CalibratedCurve make_nonnegative(SmoothEstimate estimate) {
  const Interval dom = estimate.domain();
  constexpr std::size_t kGrid = 40001;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double t = dom.a + dom.length() * static_cast<double>(i) / (kGrid - 1);
    lowest = std::min(lowest, estimate(t));
  }
  const double shift = lowest < 0.0 ? -lowest : 0.0;
  return CalibratedCurve{std::move(estimate), shift, 1.0};
}

double lscv(const SmoothEstimate& estimate, const CumulativeProcess& pooled, std::size_t n) {
  if (n < 2) throw std::invalid_argument("cross-validation needs n >= 2");
  const double term1 = integrate(estimate, 2);
  double sum = 0.0;
  double prev = pooled.base_value();
  const auto& bp = pooled.breakpoints();
  const auto& val = pooled.values();
  for (std::size_t k = 0; k < bp.size(); ++k) {
    sum += (val[k] - prev) * estimate(bp[k]);
    prev = val[k];
  }
  const double nd = static_cast<double>(n);
  const double term2 = -2.0 * nd / (nd - 1.0) * sum;
  const double term3 = 2.0 * kernel::peak / ((nd - 1.0) * estimate.bandwidth());
  return term1 + term2 + term3;
}

std::vector<double> default_bandwidth_grid(Interval domain, std::size_t count) {
  if (count < 2) throw std::invalid_argument("bandwidth grid needs at least two points");
  const double lo = 0.05 * domain.length() / 3.0;
  const double hi = 0.45 * domain.length();
  std::vector<double> grid(count);
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return grid;
}

namespace {

template <typename Source>
double select_bandwidth_impl(const Source& source, BoundaryCorrection correction,
                             const CumulativeProcess& pooled, std::size_t n,
                             const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("empty bandwidth grid");
  double best_h = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> ordered = grid;
  std::sort(ordered.begin(), ordered.end());
  for (double h : ordered) {
    SmoothEstimate est = [&] {
      if constexpr (std::is_same_v<Source, MonotoneStepEstimate>) {
        return SmoothEstimate::of_monotone(source, h, correction);
      } else {
        return SmoothEstimate::of_cumulative(source, h, correction);
      }
    }();
    const double score = lscv(est, pooled, n);
    if (score <= best_score) {  // ties resolve to the larger bandwidth
      best_score = score;
      best_h = h;
    }
  }
  return best_h;
}

}  // namespace

double select_bandwidth(const MonotoneStepEstimate& source, BoundaryCorrection correction,
                        const CumulativeProcess& pooled, std::size_t n,
                        const std::vector<double>& grid) {
  return select_bandwidth_impl(source, correction, pooled, n, grid);
}

double select_bandwidth(const CumulativeProcess& source, BoundaryCorrection correction,
                        const CumulativeProcess& pooled, std::size_t n,
                        const std::vector<double>& grid) {
  return select_bandwidth_impl(source, correction, pooled, n, grid);
}

}  // namespace monotest
