#include <cmath>
#include <random>

#include "doctest.h"
#include "ecap/complex_literal.hpp"
#include "ecap/elliptic.hpp"
#include "ecap/error.hpp"

using namespace ecap;

namespace {

const Complex I(0.0, 1.0);

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Random elliptic operators: c11 = 1 and roots drawn off the real axis.
EllipticOperator random_operator(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Complex r1(u(rng), 0.3 + std::abs(u(rng)));
    const Complex r2(u(rng), (u(rng) > 0 ? 1 : -1) * (0.3 + std::abs(u(rng))));
    // c11 (l - r1)(l - r2) = c11 l^2 + 2 c12 l + c22
    const Complex c11(1.0 + 0.3 * u(rng), 0.3 * u(rng));
    try {
      return new_operator(c11, -0.5 * c11 * (r1 + r2), c11 * r1 * r2);
    } catch (const Error&) {
    }
  }
}

}  // namespace

TEST_CASE("roots of the basic examples") {
  const auto lap = laplacian();
  CHECK(std::abs(lap.lambda1 - I) < 1e-15);
  CHECK(std::abs(lap.lambda2 + I) < 1e-15);
  CHECK(lap.nu == 1);
  CHECK_FALSE(lap.repeated);

  const auto bit = bitsadze();
  CHECK(bit.repeated);
  CHECK(std::abs(bit.lambda1 + I) < 1e-12);
  CHECK(std::abs(bit.lambda2 + I) < 1e-12);
  CHECK(bit.nu == -1);
}

TEST_CASE("non-elliptic and degenerate operators are rejected") {
  auto kind_of = [](Complex a, Complex b, Complex c) {
    try {
      new_operator(a, b, c);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind_of(1.0, 0.0, 0.0) == ErrorKind::NotElliptic);
  CHECK(kind_of(1.0, 0.0, -1.0) == ErrorKind::NotElliptic);  // wave operator
  CHECK(kind_of(0.0, 1.0, 0.0) == ErrorKind::NotElliptic);
  CHECK(kind_of(0.0, 0.0, 0.0) == ErrorKind::DegenerateOperator);
}

TEST_CASE("root residual and ordering for random operators") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto op = random_operator(rng);
    const double scale = std::abs(op.c11) + std::abs(op.c12) + std::abs(op.c22);
    for (Complex l : {op.lambda1, op.lambda2}) {
      const Complex res = op.c11 * l * l + 2.0 * op.c12 * l + op.c22;
      CHECK(std::abs(res) <= 1e-12 * scale * (1.0 + std::norm(l)));
    }
    CHECK(op.lambda1.imag() >= op.lambda2.imag());
    const bool differ = std::signbit(op.lambda1.imag()) != std::signbit(op.lambda2.imag());
    CHECK(op.nu == (differ ? 1 : -1));
  }
}

TEST_CASE("canonical coordinates") {
  const Point z(0.7, -1.3);
  auto lap = coords(laplacian(), z);
  CHECK(std::abs(lap.z1 - z / 2.0) < 1e-15);
  CHECK(std::abs(lap.z2 - std::conj(z) / 2.0) < 1e-15);
  auto bit = coords(bitsadze(), z);
  CHECK(std::abs(bit.z1 - std::conj(z) / 2.0) < 1e-15);
  CHECK(std::abs(bit.z2 - z / 2.0) < 1e-15);
  auto zero = coords(laplacian(), 0.0);
  CHECK(zero.z1 == 0.0);
  CHECK(zero.z2 == 0.0);
}

TEST_CASE("characteristic derivations are dual to the coordinates") {
  // Central differences of the coordinate maps on a unit-scale stencil.
  std::mt19937_64 rng(3);
  const double h = 1e-3;
  for (int trial = 0; trial < 10; ++trial) {
    const auto op = trial == 0 ? laplacian() : trial == 1 ? bitsadze() : random_operator(rng);
    for (const LinearForm* form : {&op.coord1, &op.coord2}) {
      const Point x(0.3, 0.4);
      const Complex dx1 = ((*form)(x + h) - (*form)(x - h)) / (2 * h);
      const Complex dx2 = ((*form)(x + I * h) - (*form)(x - I * h)) / (2 * h);
      auto [d1, d2] = characteristic_derivatives(op, dx1, dx2);
      const bool first = form == &op.coord1;
      CHECK(std::abs(d1 - (first ? 1.0 : 0.0)) < 1e-10);
      CHECK(std::abs(d2 - (first ? 0.0 : 1.0)) < 1e-10);
    }
    CHECK(std::abs(std::abs(op.coord1.alpha) - std::abs(op.coord1.beta)) > 1e-6);
    CHECK(std::abs(std::abs(op.coord2.alpha) - std::abs(op.coord2.beta)) > 1e-6);
  }
}

TEST_CASE("fundamental solution closed forms") {
  const auto lap = laplacian();
  const auto bit = bitsadze();
  CHECK(std::abs(phi(lap, 2.0)) < 1e-15);
  CHECK(std::abs(phi(lap, 2.0 * I)) < 1e-15);
  CHECK(std::abs(phi(bit, 1.0) - 1.0 / kPi) < 1e-15);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const Point z(u(rng), u(rng));
    const Complex want_lap = std::log(z * std::conj(z) / 4.0) / (4.0 * kPi);
    const Complex want_bit = std::conj(z) / z / kPi;
    CHECK(std::abs(phi(lap, z) - want_lap) <= 1e-12 * std::max(1.0, std::abs(want_lap)));
    CHECK(rel(phi(bit, z), want_bit) <= 1e-12);
  }
  CHECK_THROWS_AS(phi(lap, 0.0), Error);
}

TEST_CASE("fundamental solution is continuous around the origin") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto op = random_operator(rng);
    Complex prev = phi(op, std::polar(1.0, -kPi));
    for (int k = 1; k <= 2000; ++k) {
      const Complex cur = phi(op, std::polar(1.0, -kPi + 2.0 * kPi * k / 2000));
      CHECK(std::abs(cur - prev) < 0.05 * std::abs(op.k1));
      prev = cur;
    }
  }
}

TEST_CASE("gradient matches finite differences and is odd") {
  std::mt19937_64 rng(9);
  const double h = 1e-5;
  for (int trial = 0; trial < 12; ++trial) {
    const auto op = trial == 0 ? laplacian() : trial == 1 ? bitsadze() : random_operator(rng);
    const Point z(0.8, -0.45);
    const Complex dx1 = (phi(op, z + h) - phi(op, z - h)) / (2 * h);
    const Complex dx2 = (phi(op, z + I * h) - phi(op, z - I * h)) / (2 * h);
    auto [fd1, fd2] = characteristic_derivatives(op, dx1, dx2);
    auto [g1, g2] = grad_phi(op, z);
    CHECK(rel(g1, fd1) <= 1e-8);
    CHECK(rel(g2, fd2) <= 1e-8);
    auto [m1, m2] = grad_phi(op, -z);
    CHECK(g1 + m1 == Complex(0.0));
    CHECK(g2 + m2 == Complex(0.0));
  }
  const auto lap = laplacian();
  auto [a, b] = grad_phi(lap, 1.0);
  CHECK(rel(a, 2.0 * lap.k1) < 1e-15);
  CHECK(rel(b, 2.0 * lap.k1) < 1e-15);
  const auto bit = bitsadze();
  auto [c, d] = grad_phi(bit, 1.0);
  CHECK(rel(c, 2.0 * bit.k1) < 1e-15);
  CHECK(rel(d, -2.0 * bit.k1) < 1e-15);
  CHECK(grad_phi_bound(lap) > 0.0);
}

TEST_CASE("kernels") {
  auto [l1, l2] = kernels(laplacian(), 1.0);
  CHECK(std::abs(l1 - 2.0) < 1e-15);
  CHECK(std::abs(l2 - 2.0) < 1e-15);
  auto [b1, b2] = kernels(bitsadze(), 1.0);
  CHECK(std::abs(b1 - 2.0) < 1e-15);
  CHECK(std::abs(b2 - 2.0) < 1e-15);

  // Growth: |K(z)| |z| depends only on arg z, so dyadic annuli give the same bound.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& op : {laplacian(), bitsadze(), random_operator(rng)}) {
    double global = 0.0;
    std::vector<double> per_annulus(10, 0.0);
    for (int k = 0; k < 10000; ++k) {
      const int ring = k % 10;
      const double r = std::ldexp(1.0 + u(rng), ring - 5);
      const Point z = std::polar(r, 2 * kPi * u(rng));
      auto [k1, k2] = kernels(op, z);
      auto [m1, m2] = kernels(op, -z);
      CHECK(k1 == -m1);
      CHECK(k2 == -m2);
      const double v = std::max(std::abs(k1), std::abs(k2)) * r;
      per_annulus[ring] = std::max(per_annulus[ring], v);
      global = std::max(global, v);
    }
    for (double m : per_annulus) CHECK(m <= 1.01 * global);
    CHECK(global < 1e3);
  }
}

TEST_CASE("k1 calibration") {
  const auto lap = laplacian();
  const auto bit = bitsadze();
  CHECK(rel(calibrate_k1(lap), 1.0 / (4.0 * kPi)) < 1e-6);
  CHECK(rel(calibrate_k1(bit), 1.0 / kPi) < 1e-6);
  CHECK(calibration_residual(lap, lap.k1) < 1e-6);
  CHECK(calibration_residual(bit, bit.k1) < 1e-6);

  // Scaling the operator by t scales k1 by 1/t.
  const Complex t(2.0, -0.5);
  const auto scaled = new_operator(t * 1.0, 0.0, t * 1.0);
  CHECK(rel(scaled.k1, lap.k1 / t) < 1e-6);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto op = random_operator(rng);
    CHECK(std::abs(op.k1) > 0.0);
    CHECK(calibration_residual(op, op.k1) < 1e-6);
  }
}

TEST_CASE("apply_L on polynomials") {
  auto x1sq = sample({-1, -1}, 0.1, 21, 21, [](Point x) { return Complex(x.real() * x.real()); });
  auto lx = apply_L(laplacian(), x1sq);
  auto bx = apply_L(bitsadze(), x1sq);
  auto re_z2 = sample({-1, -1}, 0.1, 21, 21, [](Point x) { return (x * x).real(); });
  auto lr = apply_L(laplacian(), re_z2);
  CHECK(lx.invalid_margin == 2);
  auto quartic = sample({-1, -1}, 0.1, 21, 21, [](Point x) { return Complex(std::pow(x.real() * x.imag(), 2)); });
  auto lq = apply_L(laplacian(), quartic);
  for (int iy = 2; iy < 19; ++iy) {
    for (int ix = 2; ix < 19; ++ix) {
      const Point x = lq.node(ix, iy);
      CHECK(std::abs(lq.at(ix, iy) - 2.0 * std::norm(x)) < 1e-10);
      CHECK(std::abs(lx.at(ix, iy) - 2.0) < 1e-10);
      CHECK(std::abs(bx.at(ix, iy) - 0.5) < 1e-10);
      CHECK(std::abs(lr.at(ix, iy)) < 1e-10);
    }
  }
  GridFunction tiny = sample({0, 0}, 1.0, 4, 5, [](Point) { return Complex(1.0); });
  CHECK_THROWS_AS(apply_L(laplacian(), tiny), Error);
}

TEST_CASE("complex literals") {
  CHECK(parse_complex("0.25+0.25i") == Complex(0.25, 0.25));
  CHECK(parse_complex("1") == Complex(1.0, 0.0));
  CHECK(parse_complex("-0.25") == Complex(-0.25, 0.0));
  CHECK(parse_complex("-i") == Complex(0.0, -1.0));
  CHECK(parse_complex("0.25i") == Complex(0.0, 0.25));
  CHECK(parse_complex("1e-3-2i") == Complex(1e-3, -2.0));
  CHECK_THROWS_AS(parse_complex("1 + 2i"), Error);
  CHECK_THROWS_AS(parse_complex("1,5"), Error);
  CHECK(parse_complex(format_complex(Complex(0.1, -1.0 / 3.0))) == Complex(0.1, -1.0 / 3.0));
}
