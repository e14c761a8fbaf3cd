#pragma once

namespace monotest::kernel {

// Triweight kernel K(u) = (35/32)(1-u^2)^3 on [-1,1].
inline constexpr double peak = 35.0 / 32.0;  // K(0)

double triweight(double u);
double triweight_deriv(double u);

// Partial moments: moment(j, s) = integral of u^j K(u) over [-1, s], clamped
// so the value saturates for s outside [-1,1]. j must be 0, 1 or 2.
double moment(int j, double s);

// Mass of the scaled kernel K_h to the right of x: 1 - moment(0, x/h).
double tail(double x, double h);

// Boundary-correction coefficients: (phi + psi u) K(u) integrates to one and
// has vanishing first moment over [-1, s], for s in [0, 1].
struct BoundaryCoefficients {
  double phi = 1.0;
  double psi = 0.0;
};

BoundaryCoefficients boundary_coeffs(double s);

// Derivative of the coefficient pair with respect to s.
BoundaryCoefficients boundary_coeffs_deriv(double s);

}  // namespace monotest::kernel
