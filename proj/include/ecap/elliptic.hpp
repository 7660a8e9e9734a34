#pragma once

#include <utility>

#include "ecap/grid.hpp"
#include "ecap/types.hpp"

namespace ecap {

/// A real-linear map of the plane written as z -> alpha*z + beta*conj(z).
struct LinearForm {
  Complex alpha;
  Complex beta;
  Complex operator()(Point z) const noexcept { return alpha * z + beta * std::conj(z); }
};

/// Values of the two canonical coordinates at a point.
struct CanonicalCoords {
  Complex z1;
  Complex z2;
};

/// The constant-coefficient operator c11 d11 + 2 c12 d12 + c22 d22 together with its
/// characteristic data. Immutable after construction; build it with new_operator().
struct EllipticOperator {
  Complex c11, c12, c22;
  Complex lambda1, lambda2;
  bool repeated = false;
  int nu = -1;
  Complex k1;
  LinearForm coord1;
  LinearForm coord2;
  /// 2*pi*i*m picked so that phi_unnormalized(1) is the principal log.
  Complex branch_offset;

  /// L(x) = c11 x1^2 + 2 c12 x1 x2 + c22 x2^2 for x = x1 + i x2.
  Complex symbol(Point x) const noexcept {
    const double a = x.real(), b = x.imag();
    return c11 * (a * a) + 2.0 * c12 * (a * b) + c22 * (b * b);
  }
};

/// Factorizes the operator, orders the roots and sets k1 (closed form for the
/// Laplacian and the Bitsadze operator, calibrate_k1() otherwise).
/// Throws NotElliptic or DegenerateOperator.
EllipticOperator new_operator(Complex c11, Complex c12, Complex c22);

EllipticOperator laplacian();
EllipticOperator bitsadze();

CanonicalCoords coords(const EllipticOperator& op, Point z);

/// Fundamental solution. Throws SingularPoint at z = 0.
Complex phi(const EllipticOperator& op, Point z);

/// phi without the k1 factor: log(z1 z2^nu) on the fixed branch, or z1/z2.
Complex phi_unnormalized(const EllipticOperator& op, Point z);

/// Characteristic derivatives (d_1 Phi, d_2 Phi). Throws SingularPoint at z = 0.
std::pair<Complex, Complex> grad_phi(const EllipticOperator& op, Point z);

/// Empirical sup of |grad_phi(z)| * |z| over the unit circle.
double grad_phi_bound(const EllipticOperator& op);

/// (K1, K2) = (1/z1, 1/z2), or (z1/z2^2, 1/z2) for a repeated root.
std::pair<Complex, Complex> kernels(const EllipticOperator& op, Point z);

/// Numerical k1 with <Phi, L bump> = bump(0), from two independent bumps.
/// Throws CalibrationFailed when the two disagree beyond 1e-4 relative.
Complex calibrate_k1(const EllipticOperator& op);

/// Residual |k1 <Phi0, L bump> - bump(0)| for the second calibration bump.
double calibration_residual(const EllipticOperator& op, Complex k1);

/// Fourth-order central-difference L f. The two outer rings of the output are flagged invalid.
/// Throws GridTooSmall below 5 samples per axis.
GridFunction apply_L(const EllipticOperator& op, const GridFunction& f);

/// The characteristic derivations d_1, d_2 applied to a gradient (d/dx1, d/dx2).
std::pair<Complex, Complex> characteristic_derivatives(const EllipticOperator& op, Complex dx1,
                                                       Complex dx2);

}  // namespace ecap
