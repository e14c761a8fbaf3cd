#include "monotest/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace monotest::kernel {

double triweight(double u) {
  if (u <= -1.0 || u >= 1.0) return 0.0;
  const double w = 1.0 - u * u;
  return peak * w * w * w;
}

double triweight_deriv(double u) {
  if (u <= -1.0 || u >= 1.0) return 0.0;
  const double w = 1.0 - u * u;
  return -6.0 * peak * u * w * w;
}

double moment(int j, double s) {
  const double u = std::clamp(s, -1.0, 1.0);
  const double u2 = u * u;
  switch (j) {
    case 0: {
      // (35/32)(u - u^3 + (3/5)u^5 - (1/7)u^7) + 1/2
      const double poly = u * (1.0 + u2 * (-1.0 + u2 * (3.0 / 5.0 + u2 * (-1.0 / 7.0))));
      return peak * poly + 0.5;
    }
    case 1: {
      // (35/32)(u^2/2 - (3/4)u^4 + u^6/2 - u^8/8) - 35/256
      const double poly = u2 * (0.5 + u2 * (-0.75 + u2 * (0.5 + u2 * (-0.125))));
      return peak * poly - 35.0 / 256.0;
    }
    case 2: {
      // (35/32)(u^3/3 - (3/5)u^5 + (3/7)u^7 - u^9/9) + 1/18
      const double poly =
          u * u2 * (1.0 / 3.0 + u2 * (-3.0 / 5.0 + u2 * (3.0 / 7.0 + u2 * (-1.0 / 9.0))));
      return peak * poly + 1.0 / 18.0;
    }
    default:
      throw std::invalid_argument("kernel moment order must be 0, 1 or 2");
  }
}

double tail(double x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  return 1.0 - moment(0, x / h);
}

BoundaryCoefficients boundary_coeffs(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("boundary coordinate must be in [0,1]");
  const double m0 = moment(0, s);
  const double m1 = moment(1, s);
  const double m2 = moment(2, s);
  const double det = m0 * m2 - m1 * m1;
  return {m2 / det, -m1 / det};
}

BoundaryCoefficients boundary_coeffs_deriv(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("boundary coordinate must be in [0,1]");
  const double m0 = moment(0, s);
  const double m1 = moment(1, s);
  const double m2 = moment(2, s);
  const double det = m0 * m2 - m1 * m1;
  const double k = triweight(s);
  const double dm0 = k, dm1 = s * k, dm2 = s * s * k;
  const double ddet = dm0 * m2 + m0 * dm2 - 2.0 * m1 * dm1;
  const double dphi = (dm2 * det - m2 * ddet) / (det * det);
  const double dpsi = (-dm1 * det + m1 * ddet) / (det * det);
  return {dphi, dpsi};
}

}  // namespace monotest::kernel
