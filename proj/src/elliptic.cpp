#include "ecap/elliptic.hpp"

#include <algorithm>
#include <cmath>

#include "ecap/error.hpp"
#include "ecap/quadrature.hpp"

namespace ecap {

namespace {

constexpr double kRealRootTol = 1e-12;
constexpr double kRepeatedTol = 1e-9;

// log(1 + u) for |u| < 1 without the cancellation of std::log(1.0 + u).
Complex log1p_c(Complex u) {
  const double re = 0.5 * std::log1p(2.0 * u.real() + std::norm(u));
  const double im = std::atan2(u.imag(), 1.0 + u.real());
  return {re, im};
}

LinearForm from_real_coefficients(Complex p, Complex q) {
  // p x1 + q x2 with x1 = (z + conj z)/2, x2 = (z - conj z)/(2i).
  const Complex i(0.0, 1.0);
  return {(p - i * q) * 0.5, (p + i * q) * 0.5};
}

// log z_s with the ln|z| and arg z parts removed; `winding` receives +1 when the
// coordinate preserves orientation and -1 otherwise.
Complex reduced_log(const LinearForm& form, Point z, int& winding) {
  if (std::abs(form.alpha) > std::abs(form.beta)) {
    winding = 1;
    return std::log(form.alpha) + log1p_c(form.beta * std::conj(z) / (form.alpha * z));
  }
  winding = -1;
  return std::log(form.beta) + log1p_c(form.alpha * z / (form.beta * std::conj(z)));
}

Complex log_without_offset(const EllipticOperator& op, Point z) {
  int w1 = 0, w2 = 0;
  const Complex g1 = reduced_log(op.coord1, z, w1);
  const Complex g2 = reduced_log(op.coord2, z, w2);
  // w1 + nu*w2 == 0 for every elliptic operator, so the angular parts cancel and
  // the branch is single valued on the punctured plane.
  return (1.0 + op.nu) * std::log(std::abs(z)) + g1 + static_cast<double>(op.nu) * g2;
}

bool same(Complex a, Complex b) { return std::abs(a - b) <= 1e-15 * (1.0 + std::abs(b)); }

// Test bump (1 - (x1/a)^2 - (x2/b)^2)^n on its elliptic support.
struct Bump {
  double a, b;
  int n;

  double value(Point x) const {
    const double q = 1.0 - std::pow(x.real() / a, 2) - std::pow(x.imag() / b, 2);
    return q > 0.0 ? std::pow(q, n) : 0.0;
  }

  Complex apply(const EllipticOperator& op, Point x) const {
    const double x1 = x.real(), x2 = x.imag();
    const double q = 1.0 - std::pow(x1 / a, 2) - std::pow(x2 / b, 2);
    if (q <= 0.0) return 0.0;
    const double a2 = a * a, b2 = b * b;
    const double qn1 = std::pow(q, n - 1), qn2 = std::pow(q, n - 2);
    const double d11 = n * (n - 1) * qn2 * 4.0 * x1 * x1 / (a2 * a2) - 2.0 * n * qn1 / a2;
    const double d22 = n * (n - 1) * qn2 * 4.0 * x2 * x2 / (b2 * b2) - 2.0 * n * qn1 / b2;
    const double d12 = n * (n - 1) * qn2 * 4.0 * x1 * x2 / (a2 * b2);
    return op.c11 * d11 + 2.0 * op.c12 * d12 + op.c22 * d22;
  }

  // <Phi0, L bump> in polar coordinates about the singularity, rho = rho_max(theta) t^2.
  Complex pairing(const EllipticOperator& op) const {
    constexpr int n_theta = 512;
    static const QuadratureRule rule = gauss_legendre(96);
    Complex total{};
    for (int k = 0; k < n_theta; ++k) {
      const double theta = 2.0 * kPi * k / n_theta;
      const double c = std::cos(theta), s = std::sin(theta);
      const double rho_max = 1.0 / std::sqrt(c * c / (a * a) + s * s / (b * b));
      Complex ray{};
      for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
        const double t = rule.nodes[m];
        if (t == 0.0) continue;
        const double rho = rho_max * t * t;
        const Point x(rho * c, rho * s);
        ray += rule.weights[m] * 2.0 * rho_max * rho_max * t * t * t *
               phi_unnormalized(op, x) * apply(op, x);
      }
      total += ray;
    }
    return total * (2.0 * kPi / n_theta);
  }
};

constexpr Bump kBumpA{1.0, 1.0, 4};
constexpr Bump kBumpB{1.3, 0.7, 5};

}  // namespace

EllipticOperator new_operator(Complex c11, Complex c12, Complex c22) {
  for (Complex c : {c11, c12, c22}) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw Error(ErrorKind::InvalidArgument, "coefficients must be finite");
    }
  }
  if (c11 == 0.0 && c12 == 0.0 && c22 == 0.0) {
    throw Error(ErrorKind::DegenerateOperator, "all coefficients vanish");
  }
  // c11 = 0 makes L(1, 0) = 0.
  if (c11 == 0.0) throw Error(ErrorKind::NotElliptic, "c11 = 0: L vanishes on the x1 axis");

  const Complex disc = std::sqrt(c12 * c12 - c11 * c22);
  const Complex q = std::abs(c12 + disc) >= std::abs(c12 - disc) ? -(c12 + disc) : -(c12 - disc);
  if (q == 0.0) throw Error(ErrorKind::NotElliptic, "double root at 0");
  Complex r1 = q / c11;
  Complex r2 = c22 / q;

  for (Complex r : {r1, r2}) {
    if (std::abs(r.imag()) <= kRealRootTol * (1.0 + std::abs(r))) {
      throw Error(ErrorKind::NotElliptic, "characteristic root is real");
    }
  }

  // Descending (Im, Re): the Laplacian gets lambda1 = i.
  auto before = [](Complex a, Complex b) {
    return a.imag() != b.imag() ? a.imag() > b.imag() : a.real() > b.real();
  };
  if (before(r2, r1)) std::swap(r1, r2);

  EllipticOperator op;
  op.c11 = c11;
  op.c12 = c12;
  op.c22 = c22;
  op.repeated = std::abs(r1 - r2) <= kRepeatedTol * (1.0 + std::abs(r1));
  if (op.repeated) {
    const Complex r = -c12 / c11;
    op.lambda1 = op.lambda2 = r;
    op.nu = -1;
    op.coord1 = from_real_coefficients(0.5, -0.5 / r);
    op.coord2 = from_real_coefficients(0.5, 0.5 / r);
  } else {
    op.lambda1 = r1;
    op.lambda2 = r2;
    op.nu = (std::signbit(r1.imag()) != std::signbit(r2.imag())) ? 1 : -1;
    op.coord1 = from_real_coefficients(r2 / (r2 - r1), 1.0 / (r2 - r1));
    op.coord2 = from_real_coefficients(r1 / (r1 - r2), 1.0 / (r1 - r2));
  }

  if (!op.repeated) {
    const Complex w1 = op.coord1(1.0) * std::pow(op.coord2(1.0), static_cast<double>(op.nu));
    const double gap = std::log(w1).imag() - log_without_offset(op, 1.0).imag();
    op.branch_offset = Complex(0.0, 2.0 * kPi * std::round(gap / (2.0 * kPi)));
  }

  if (same(c11, 1.0) && c12 == 0.0 && same(c22, 1.0)) {
    op.k1 = 1.0 / (4.0 * kPi);
  } else if (same(c11, 0.25) && same(c12, Complex(0.0, 0.25)) && same(c22, -0.25)) {
    op.k1 = 1.0 / kPi;
  } else {
    op.k1 = calibrate_k1(op);
  }
  return op;
}

EllipticOperator laplacian() { return new_operator(1.0, 0.0, 1.0); }

EllipticOperator bitsadze() { return new_operator(0.25, Complex(0.0, 0.25), -0.25); }

CanonicalCoords coords(const EllipticOperator& op, Point z) { return {op.coord1(z), op.coord2(z)}; }

Complex phi_unnormalized(const EllipticOperator& op, Point z) {
  if (z == 0.0) throw Error(ErrorKind::SingularPoint, "fundamental solution at 0");
  if (op.repeated) return op.coord1(z) / op.coord2(z);
  return log_without_offset(op, z) + op.branch_offset;
}

Complex phi(const EllipticOperator& op, Point z) { return op.k1 * phi_unnormalized(op, z); }

std::pair<Complex, Complex> grad_phi(const EllipticOperator& op, Point z) {
  if (z == 0.0) throw Error(ErrorKind::SingularPoint, "gradient of fundamental solution at 0");
  const Complex z1 = op.coord1(z), z2 = op.coord2(z);
  if (op.repeated) return {op.k1 / z2, -op.k1 * z1 / (z2 * z2)};
  return {op.k1 / z1, op.k1 * static_cast<double>(op.nu) / z2};
}

double grad_phi_bound(const EllipticOperator& op) {
  double bound = 0.0;
  constexpr int n = 4096;
  for (int k = 0; k < n; ++k) {
    const Point z = std::polar(1.0, 2.0 * kPi * (k + 0.5) / n);
    auto [g1, g2] = grad_phi(op, z);
    bound = std::max(bound, std::sqrt(std::norm(g1) + std::norm(g2)));
  }
  return bound;
}

std::pair<Complex, Complex> kernels(const EllipticOperator& op, Point z) {
  if (z == 0.0) throw Error(ErrorKind::SingularPoint, "kernel at 0");
  const Complex z1 = op.coord1(z), z2 = op.coord2(z);
  if (op.repeated) return {z1 / (z2 * z2), 1.0 / z2};
  return {1.0 / z1, 1.0 / z2};
}

Complex calibrate_k1(const EllipticOperator& op) {
  const Complex ka = kBumpA.value(0.0) / kBumpA.pairing(op);
  const Complex kb = kBumpB.value(0.0) / kBumpB.pairing(op);
  if (!std::isfinite(std::abs(ka)) || std::abs(ka - kb) > 1e-4 * std::abs(ka)) {
    throw Error(ErrorKind::CalibrationFailed, "bump calibrations disagree");
  }
  return ka;
}

double calibration_residual(const EllipticOperator& op, Complex k1) {
  return std::abs(k1 * kBumpB.pairing(op) - kBumpB.value(0.0));
}

GridFunction apply_L(const EllipticOperator& op, const GridFunction& f) {
  if (f.nx < 5 || f.ny < 5) throw Error(ErrorKind::GridTooSmall, "apply_L needs 5x5 samples");
  GridFunction out = zeros_like(f);
  out.invalid_margin = f.invalid_margin + 2;
  // Fourth-order central stencils; the mixed term is the tensor product of first differences.
  const double h2 = f.spacing * f.spacing;
  const Complex a = op.c11 / (12.0 * h2);
  const Complex b = 2.0 * op.c12 / (144.0 * h2);
  const Complex c = op.c22 / (12.0 * h2);
  const std::ptrdiff_t row = f.nx;
  const Complex* v = f.values.data();
  constexpr double d1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  for (int iy = 2; iy + 2 < f.ny; ++iy) {
    for (int ix = 2; ix + 2 < f.nx; ++ix) {
      const Complex* p = v + f.index(ix, iy);
      const Complex fc = p[0];
      Complex mixed{};
      for (int j = 0; j < 5; ++j) {
        if (d1[j] == 0.0) continue;
        const Complex* r = p + (j - 2) * row;
        mixed += d1[j] * (8.0 * (r[1] - r[-1]) - (r[2] - r[-2]));
      }
      out.values[f.index(ix, iy)] = a * (-p[2] + 16.0 * p[1] - 30.0 * fc + 16.0 * p[-1] - p[-2]) + b * mixed +
                                    c * (-p[2 * row] + 16.0 * p[row] - 30.0 * fc + 16.0 * p[-row] - p[-2 * row]);
    }
  }
  return out;
}

std::pair<Complex, Complex> characteristic_derivatives(const EllipticOperator& op, Complex dx1,
                                                       Complex dx2) {
  const Complex d1 = dx1 - op.lambda1 * dx2;
  const Complex d2 = op.repeated ? dx1 + op.lambda1 * dx2 : dx1 - op.lambda2 * dx2;
  return {d1, d2};
}

}  // namespace ecap
