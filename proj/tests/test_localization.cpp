#include <cmath>
#include <random>

#include "doctest.h"
#include "ecap/error.hpp"
#include "ecap/localization.hpp"

using namespace ecap;

namespace {

const Complex I(0.0, 1.0);
constexpr double kR = 0.25;

// Smooth bump supported in B(0, kR) times a non-symmetric polynomial.
Complex bump_f(Point x) {
  const double q = 1.0 - std::norm(x) / (kR * kR);
  if (q <= 0.0) return 0.0;
  return q * q * q * q * (1.0 + x.real() + I * x.imag() * x.imag() + 2.0 * x.real() * x.imag());
}

std::pair<Complex, Complex> bump_grad(Point x) {
  const double q = 1.0 - std::norm(x) / (kR * kR);
  if (q <= 0.0) return {0.0, 0.0};
  const double x1 = x.real(), x2 = x.imag();
  const Complex p = 1.0 + x1 + I * x2 * x2 + 2.0 * x1 * x2;
  const double dq1 = -2.0 * x1 / (kR * kR), dq2 = -2.0 * x2 / (kR * kR);
  const double q3 = q * q * q;
  return {4.0 * q3 * dq1 * p + q3 * q * (1.0 + 2.0 * x2),
          4.0 * q3 * dq2 * p + q3 * q * (2.0 * I * x2 + 2.0 * x1)};
}

// Grid of spacing 1/128 on [-1.25, 1.25]^2.
GridFunction test_grid() { return sample({-1.25, -1.25}, 1.0 / 128.0, 321, 321, bump_f, bump_grad); }

PointDistribution random_cluster(std::mt19937_64& rng, Point a, double radius, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointDistribution t;
  while (static_cast<int>(t.points.size()) < n) {
    const Point p(u(rng), u(rng));
    if (std::abs(p) >= 1.0) continue;
    t.points.push_back(a + radius * p);
    t.weights.emplace_back(u(rng), u(rng));
  }
  return t;
}

}  // namespace

TEST_CASE("mollifier is a normalized even bump") {
  const double delta = 0.125, h = delta / 16;
  const GridFunction k = mollifier(delta, h);
  CHECK(k.nx == 33);
  double sum = 0.0;
  for (int iy = 0; iy < k.ny; ++iy)
    for (int ix = 0; ix < k.nx; ++ix) {
      const Complex v = k.at(ix, iy);
      sum += v.real();
      CHECK(v.imag() == 0.0);
      CHECK(v == k.at(k.nx - 1 - ix, iy));
      CHECK(v == k.at(iy, ix));
      if (std::abs(k.node(ix, iy)) >= delta) CHECK(v == 0.0);
    }
  CHECK(sum * h * h == doctest::Approx(1.0).epsilon(1e-13));
  // Profile ratio (1 - 1/4)^2 between x = 0 and |x| = delta/2.
  CHECK(k.at(24, 16).real() / k.at(16, 16).real() == doctest::Approx(0.5625).epsilon(1e-13));
  // Discrete normalization barely moves the continuous one.
  CHECK(k.at(16, 16).real() == doctest::Approx(3.0 / (kPi * delta * delta)).epsilon(2e-3));
}

TEST_CASE("partition of unity") {
  const GridFunction g = test_grid();
  const double delta = 0.125;
  const PartitionOfUnity pu = build_partition(g, {-0.5, -0.5}, {0.5, 0.5}, delta);
  CHECK(pu.cells.size() > 0);
  std::vector<double> phi_sum(g.size(), 0.0), psi_sum(g.size(), 0.0);
  for (const auto& c : pu.cells) {
    CHECK(c.center == Point(c.j1 * delta, c.j2 * delta));
    for (int iy = c.psi.iy0; iy < c.psi.iy0 + c.psi.height; ++iy)
      for (int ix = c.psi.ix0; ix < c.psi.ix0 + c.psi.width; ++ix) {
        const double d = std::abs(g.node(ix, iy) - c.center);
        if (d >= delta) REQUIRE(c.phi.at(ix, iy) == 0.0);
        if (d >= 3 * delta) REQUIRE(c.psi.at(ix, iy) == 0.0);
        REQUIRE(c.phi.at(ix, iy) >= 0.0);
        phi_sum[g.index(ix, iy)] += c.phi.at(ix, iy);
        psi_sum[g.index(ix, iy)] += c.psi.at(ix, iy);
      }
  }
  double worst_phi = 0.0, worst_psi = 0.0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Point x = g.node(ix, iy);
      const double m = std::max(std::abs(x.real()), std::abs(x.imag()));
      if (m <= 0.5) worst_phi = std::max(worst_phi, std::abs(phi_sum[g.index(ix, iy)] - 1.0));
      if (m <= 0.5 - 2 * delta) worst_psi = std::max(worst_psi, std::abs(psi_sum[g.index(ix, iy)] - 1.0));
    }
  CHECK(worst_phi < 1e-12);
  CHECK(worst_psi < 1e-12);
  // The gradient bound is scale free: same constant at delta/2.
  const GridFunction fine = sample({-1.0, -1.0}, 1.0 / 256.0, 513, 513, bump_f);
  const PartitionOfUnity half = build_partition(fine, {-0.25, -0.25}, {0.25, 0.25}, delta / 2);
  CHECK(pu.gradient_constant > 1.0);
  CHECK(pu.gradient_constant < 20.0);
  CHECK(half.gradient_constant == doctest::Approx(pu.gradient_constant).epsilon(0.02));
}

TEST_CASE("partition errors") {
  const GridFunction g = test_grid();
  CHECK_THROWS_AS(build_partition(g, {-0.2, -0.2}, {0.2, 0.2}, 0.125), Error);
  try {
    build_partition(g, {-0.2, -0.2}, {0.2, 0.2}, 0.125);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BoxTooSmall);
  }
  try {
    build_partition(g, {-0.25, -0.25}, {0.25, 0.25}, 0.0625);
    FAIL("expected ResolutionTooCoarse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ResolutionTooCoarse);
  }
  try {
    build_partition(g, {-1.0, -1.0}, {1.0, 1.0}, 0.125);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("lattice self weight gives fourth-order potentials") {
  // Closed form: integral of log(|y|^2/4)/(4 pi) against exp(-|y|^2/s^2) is s^2 (log s^2 - gamma - log 4)/4.
  const auto op = laplacian();
  const double sig = 0.2;
  const double exact = sig * sig * (std::log(sig * sig) - 0.5772156649015329 - std::log(4.0)) / 4.0;
  double prev = 0.0;
  for (int n : {32, 64}) {
    const double h = 1.0 / n;
    Complex t = lattice_self_weight(op, h) * h * h;
    const int reach = static_cast<int>(1.6 / h);
    for (int j = -reach; j <= reach; ++j)
      for (int k = -reach; k <= reach; ++k) {
        if (j == 0 && k == 0) continue;
        const Point y(j * h, k * h);
        t += h * h * phi(op, y) * std::exp(-std::norm(y) / (sig * sig));
      }
    const double err = std::abs(t - exact);
    CHECK(err < 1e-6);
    if (prev > 0.0) CHECK(prev / err > 10.0);
    prev = err;
  }
  // Bounded kernels need no logarithmic term: the weight is independent of h.
  const auto b = bitsadze();
  CHECK(std::abs(lattice_self_weight(b, 0.01) - lattice_self_weight(b, 0.1)) < 1e-14);
}

TEST_CASE("grid convolution matches direct summation") {
  const auto op = new_operator(1.0, 0.3 * I, 0.6 + 0.2 * I);
  const GridFunction g = sample({-0.5, -0.5}, 1.0 / 64.0, 65, 65, [](Point) { return Complex{}; });
  GridFunction s = zeros_like(g);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int iy = 20; iy < 30; ++iy)
    for (int ix = 20; ix < 30; ++ix) s.at(ix, iy) = Complex(u(rng), u(rng));
  const PotentialConvolver conv(op, g);
  const auto out = conv.apply(s.values);
  const PointDistribution t = grid_distribution(s);
  for (auto [ix, iy] : {std::pair{0, 0}, {64, 64}, {40, 10}, {5, 60}, {32, 50}}) {
    const Complex direct = potential(op, t, g.node(ix, iy));
    CHECK(std::abs(out[g.index(ix, iy)] - direct) < 1e-12 * (1.0 + std::abs(direct)));
  }
  // Window form agrees with the full-grid form.
  std::vector<Complex> window(100);
  for (int v = 0; v < 10; ++v)
    for (int w = 0; w < 10; ++w) window[v * 10 + w] = s.at(20 + w, 20 + v);
  const auto out_w = conv.apply(20, 20, 10, 10, window);
  for (std::size_t k = 0; k < out.size(); ++k) CHECK(std::abs(out_w[k] - out[k]) < 1e-13);
}

TEST_CASE("vitushkin localization") {
  const auto op = laplacian();
  const GridFunction f = sample({-0.5, -0.5}, 1.0 / 64.0, 65, 65, bump_f);
  std::vector<Complex> phi(f.size()), phi2(f.size()), both(f.size());
  for (int iy = 0; iy < f.ny; ++iy)
    for (int ix = 0; ix < f.nx; ++ix) {
      const Point x = f.node(ix, iy);
      const double q1 = std::max(0.0, 1.0 - std::norm(x - 0.1) / 0.04);
      const double q2 = std::max(0.0, 1.0 - std::norm(x + 0.1 * I) / 0.04);
      phi[f.index(ix, iy)] = q1 * q1;
      phi2[f.index(ix, iy)] = I * q2 * q2;
      both[f.index(ix, iy)] = phi[f.index(ix, iy)] + 2.0 * phi2[f.index(ix, iy)];
    }
  const GridFunction a = vitushkin_localize(op, f, phi, 0.1, 0.2);
  const GridFunction b = vitushkin_localize(op, f, phi2, -0.1 * I, 0.2);
  const GridFunction ab = vitushkin_localize(op, f, both, 0.0, 0.4);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::abs(ab.values[k] - a.values[k] - 2.0 * b.values[k]) < 1e-12);
  try {
    vitushkin_localize(op, f, phi, 0.1, 0.15);
    FAIL("expected SupportLeak");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SupportLeak);
  }
}

TEST_CASE("localized pieces reconstruct f") {
  for (const auto& op : {laplacian(), bitsadze(), new_operator(1.0, 0.2 + 0.1 * I, 0.8 - 0.3 * I)}) {
    const GridFunction f = test_grid();
    const PartitionOfUnity pu = build_partition(f, {-0.5, -0.5}, {0.5, 0.5}, 0.125);
    const auto pieces = localized_pieces(op, f, pu);
    std::vector<Complex> sum(f.size());
    int nonzero = 0;
    for (const auto& p : pieces) {
      if (p.zero) continue;
      ++nonzero;
      for (std::size_t k = 0; k < f.size(); ++k) sum[k] += p.values.values[k];
    }
    CHECK(nonzero > 4);
    double err = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      err = std::max(err, std::abs(sum[k] - f.values[k]));
      norm = std::max(norm, std::abs(f.values[k]));
    }
    CHECK(err < 1e-4 * norm);

    // c0 by parts against the pairing of the smoothed index with L f.
    double c0_max = 0.0;
    for (const auto& p : pieces) c0_max = std::max(c0_max, std::abs(p.source.total()));
    double worst = 0.0;
    for (std::size_t j = 0; j < pieces.size(); ++j) {
      const Complex c0 = pieces[j].source.total();
      if (pieces[j].zero || std::abs(c0) < 1e-2 * c0_max) continue;
      const double e = std::abs(c0_by_parts(op, f, pu.cells[j].psi) - c0) / std::abs(c0);
      worst = std::max(worst, e);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("coverage gap") {
  const GridFunction f = test_grid();
  const PartitionOfUnity pu = build_partition(f, {-0.25, -0.25}, {0.25, 0.25}, 0.125);
  try {
    localized_pieces(laplacian(), f, pu);
    FAIL("expected CoverageGap");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CoverageGap);
  }
}

TEST_CASE("laurent coefficients of point masses") {
  const auto op = new_operator(1.0, 0.2 + 0.1 * I, 0.8 - 0.3 * I);
  const Point a(0.1, -0.2), d(0.01, 0.02);
  const Complex w(0.7, -0.4);
  PointDistribution dipole{{a + d, a}, {w, -w}};
  const auto c = laurent_coeffs(op, dipole, a, 4);
  CHECK(std::abs(c.c0) < 1e-15);
  CHECK(std::abs(c.c1().first + op.k1 * w * op.coord1(d)) < 1e-15);
  CHECK(std::abs(c.c1().second + op.k1 * static_cast<double>(op.nu) * w * op.coord2(d)) < 1e-15);
  // m-th coefficient of a single mass.
  PointDistribution mass{{a + d}, {w}};
  const auto cm = laurent_coeffs(op, mass, a, 4);
  CHECK(std::abs(cm.higher[2].first + op.k1 / 3.0 * w * std::pow(op.coord1(d), 3)) < 1e-15);

  const auto b = bitsadze();
  const auto cb = laurent_coeffs(b, mass, a, 3);
  const Complex d1 = b.coord1(d), d2 = b.coord2(d);
  CHECK(std::abs(cb.higher[1].first + b.k1 * w * d1 * d2) < 1e-15);
  CHECK(std::abs(cb.higher[1].second - b.k1 * w * d2 * d2) < 1e-15);
}

TEST_CASE("laurent series converges at the expected rate") {
  std::mt19937_64 rng(11);
  for (const auto& op : {laplacian(), bitsadze(), new_operator(1.0, 0.2 + 0.1 * I, 0.8 - 0.3 * I)}) {
    const Point a(0.3, 0.1);
    const PointDistribution t = random_cluster(rng, a, 0.1, 40);
    const auto c = laurent_coeffs(op, t, a, 8);
    std::vector<double> radii, rem;
    for (int k = 0; k <= 12; ++k) {
      const double rho = 0.4 * std::pow(2.0, k / 6.0);
      double worst = 0.0;
      for (int q = 0; q < 32; ++q) {
        const Point z = a + std::polar(rho, 2.0 * kPi * (q + 0.5) / 32);
        const Complex exact = potential_minus_monopole(op, t, a, z);
        // The same quantity through the direct sum agrees at moderate radii.
        if (k == 0 && q == 0) {
          const Complex direct = potential(op, t, z) - c.c0 * phi(op, z - a);
          CHECK(std::abs(direct - exact) < 1e-12);
        }
        worst = std::max(worst, std::abs(exact - laurent_tail(op, c, z, 8)));
      }
      radii.push_back(rho);
      rem.push_back(worst);
    }
    const SlopeFit fit = fit_loglog(radii, rem);
    const double expected = op.repeated ? -9.0 : -9.0;
    CHECK(fit.slope == doctest::Approx(expected).epsilon(0.3 / 9.0));
  }
}

TEST_CASE("laurent tail gradient matches finite differences") {
  std::mt19937_64 rng(5);
  for (const auto& op : {laplacian(), bitsadze(), new_operator(1.0, 0.4 * I, 0.5 + 0.5 * I)}) {
    const PointDistribution t = random_cluster(rng, 0.0, 0.2, 10);
    const auto c = laurent_coeffs(op, t, 0.0, 5);
    const Point z(0.9, -0.7);
    const double e = 1e-6;
    const Complex dx1 = (laurent_tail(op, c, z + e, 5) - laurent_tail(op, c, z - e, 5)) / (2 * e);
    const Complex dx2 = (laurent_tail(op, c, z + e * I, 5) - laurent_tail(op, c, z - e * I, 5)) / (2 * e);
    const auto fd = characteristic_derivatives(op, dx1, dx2);
    const auto g = laurent_tail_gradient(op, c, z, 5);
    CHECK(std::abs(g.first - fd.first) < 1e-7);
    CHECK(std::abs(g.second - fd.second) < 1e-7);
  }
}

TEST_CASE("far-field slopes of localized pieces") {
  for (const auto& op : {laplacian(), bitsadze(), new_operator(1.0, 0.2 + 0.1 * I, 0.8 - 0.3 * I)}) {
    const GridFunction f = test_grid();
    const PartitionOfUnity pu = build_partition(f, {-0.5, -0.5}, {0.5, 0.5}, 0.125);
    const auto pieces = localized_pieces(op, f, pu);
    int checked = 0;
    for (const auto& p : pieces) {
      if (p.zero || std::abs(p.source.total()) < 1e-3) continue;
      const auto c = laurent_coeffs(op, p.source, p.center, 2);
      AnnulusSpec spec;
      spec.support_radius = 3 * pu.delta;
      spec.angles = 32;
      const FarFieldReport r = farfield_decay_check(op, p.source, c, spec);
      CHECK(r.full.slope == doctest::Approx(-1.0).epsilon(0.1));
      CHECK(r.monopole_removed.slope == doctest::Approx(-2.0).epsilon(0.1));
      CHECK(r.second_order.slope == doctest::Approx(-3.0).epsilon(0.1));
      CHECK(r.full.samples == 19);
      if (++checked == 3) break;
    }
    CHECK(checked == 3);
  }
}

TEST_CASE("far-field check on a grid function") {
  const auto op = laplacian();
  // Potential of a small cluster sampled on a large grid.
  std::mt19937_64 rng(9);
  const PointDistribution t = random_cluster(rng, 0.0, 0.02, 20);
  const GridFunction g = sample({-2.0, -2.0}, 1.0 / 64.0, 257, 257, [&](Point z) { return potential(op, t, z); });
  const auto c = laurent_coeffs(op, t, 0.0, 2);
  AnnulusSpec spec;
  spec.support_radius = 0.02;
  spec.inner = 0.25;
  const FarFieldReport r = farfield_decay_check(op, g, c, spec);
  CHECK(r.full.slope == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(r.monopole_removed.slope == doctest::Approx(-2.0).epsilon(0.1));
  spec.inner = 0.1;
  CHECK_THROWS_AS(farfield_decay_check(op, g, c, spec), Error);
}

TEST_CASE("log-log fit") {
  std::vector<double> x{1, 2, 4, 8, 16}, y;
  for (double v : x) y.push_back(3.0 / (v * v));
  const SlopeFit f = fit_loglog(x, y);
  CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(f.half_width95 < 1e-10);
  CHECK(f.samples == 5);
}
