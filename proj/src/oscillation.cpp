#include "ecap/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ecap/error.hpp"
#include "ecap/parallel.hpp"
#include "ecap/quadrature.hpp"

namespace ecap {

void Disc::check() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorKind::InvalidArgument, "disc radius must be positive and finite");
  }
}

namespace {

Complex oscillation_rule(const EllipticOperator& op, const GridFunction& f, const Disc& b,
                         int n_boundary, int n_radial) {
  const double r = b.radius;
  const QuadratureRule radial = gauss_legendre(n_radial, 0.0, r);
  Complex boundary{};
  Complex area{};
  for (int k = 0; k < n_boundary; ++k) {
    const Point e = std::polar(1.0, 2.0 * kPi * k / n_boundary);
    boundary += interpolate(f, b.center + r * e) * op.symbol(e);
    Complex ray{};
    for (int m = 0; m < n_radial; ++m) {
      const double rho = radial.nodes[m];
      ray += radial.weights[m] * rho * interpolate(f, b.center + rho * e);
    }
    area += ray;
  }
  boundary /= static_cast<double>(n_boundary);
  area *= 2.0 * kPi / n_boundary;
  return boundary - (op.c11 + op.c22) / (2.0 * kPi * r * r) * area;
}

}  // namespace

Complex l_oscillation(const EllipticOperator& op, const GridFunction& f, const Disc& b,
                      const OscillationOptions& options) {
  b.check();
  if (options.n_boundary < 64) throw Error(ErrorKind::InvalidArgument, "n_boundary must be >= 64");
  if (options.n_radial < 1) throw Error(ErrorKind::InvalidArgument, "n_radial must be >= 1");
  if (!f.contains_disc(b.center, 1.05 * b.radius, 2)) {
    throw Error(ErrorKind::DiscOutsideGrid, "1.05*B does not fit inside the grid");
  }
  const Complex value = oscillation_rule(op, f, b, options.n_boundary, options.n_radial);
  if (options.check_resolution) {
    const Complex finer = oscillation_rule(op, f, b, 2 * options.n_boundary, options.n_radial);
    // Constants have zero oscillation, so measure f against its value at the center.
    const Complex f0 = interpolate(f, b.center);
    double spread = 0.0;
    for (int k = 0; k < 64; ++k) {
      const Point x = b.center + std::polar(b.radius, 2.0 * kPi * k / 64);
      spread = std::max(spread, std::abs(interpolate(f, x) - f0));
    }
    const double op_scale = std::abs(op.c11) + 2.0 * std::abs(op.c12) + std::abs(op.c22);
    // Below the noise floor a relative comparison is meaningless.
    const double change = std::abs(finer - value);
    if (change > 1e-3 * std::abs(finer) && change > 1e-7 * op_scale * spread) {
      throw Error(ErrorKind::QuadratureUnderresolved, "doubling n_boundary moved the result");
    }
  }
  return value;
}

double psi_weight(const Disc& b, Point x) {
  const double r2 = b.radius * b.radius;
  const double d2 = std::norm(x - b.center);
  if (d2 >= r2) return 0.0;
  return (r2 - d2) / (4.0 * kPi * r2);
}

Complex oscillation_via_psi(const GridFunction& lf, const Disc& b) {
  b.check();
  if (!lf.contains_disc(b.center, b.radius, 0)) {
    throw Error(ErrorKind::DiscOutsideGrid, "disc leaves the valid region of L f");
  }
  const double h = lf.spacing;
  const double half_diag = h * std::sqrt(0.5);
  constexpr int sub = 8;
  const int ix0 = std::max(0, static_cast<int>(std::floor((b.center.real() - b.radius - lf.origin.real()) / h)));
  const int ix1 = std::min(lf.nx - 1, static_cast<int>(std::ceil((b.center.real() + b.radius - lf.origin.real()) / h)));
  const int iy0 = std::max(0, static_cast<int>(std::floor((b.center.imag() - b.radius - lf.origin.imag()) / h)));
  const int iy1 = std::min(lf.ny - 1, static_cast<int>(std::ceil((b.center.imag() + b.radius - lf.origin.imag()) / h)));
  Complex total{};
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const Point x = lf.node(ix, iy);
      const double d = std::abs(x - b.center);
      double weight = 0.0;
      if (d + half_diag <= b.radius) {
        // Exact cell integral of the quadratic psi.
        weight = (psi_weight(b, x) - h * h / (24.0 * kPi * b.radius * b.radius)) * h * h;
      } else if (d - half_diag < b.radius) {
        for (int sy = 0; sy < sub; ++sy) {
          for (int sx = 0; sx < sub; ++sx) {
            const Point y = x + Point((sx + 0.5) / sub - 0.5, (sy + 0.5) / sub - 0.5) * h;
            weight += psi_weight(b, y);
          }
        }
        weight *= h * h / (sub * sub);
      }
      if (weight != 0.0) total += weight * lf.at(ix, iy);
    }
  }
  return total;
}

Complex oscillation_via_psi(const EllipticOperator& op, const GridFunction& f, const Disc& b) {
  return oscillation_via_psi(apply_L(op, f), b);
}

double modulus_of_continuity(const GridFunction& g, double r, int threads) {
  if (!g.has_gradients()) throw Error(ErrorKind::MissingGradients, "modulus of continuity needs grad1/grad2");
  const int reach = static_cast<int>(std::floor(r / g.spacing + 1e-12));
  if (reach < 1) return 0.0;

  // Half-plane offsets (dy > 0, or dy == 0 and dx > 0) inside the radius.
  std::vector<std::pair<int, int>> offsets;
  for (int dy = 0; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      if (dy == 0 && dx <= 0) continue;
      if (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy <= static_cast<double>(reach) * reach) {
        offsets.emplace_back(dx, dy);
      }
    }
  }

  // Anchor nodes on a stride that depends only on the grid size.
  const int stride = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(g.size()) / 16384.0)));
  const auto& g1 = *g.grad1;
  const auto& g2 = *g.grad2;
  std::vector<int> rows;
  for (int iy = 0; iy < g.ny; iy += stride) rows.push_back(iy);
  std::vector<double> row_max(rows.size(), 0.0);
  parallel_for(
      rows.size(),
      [&](std::size_t ri) {
        const int iy = rows[ri];
        double best = 0.0;
        for (int ix = 0; ix < g.nx; ix += stride) {
          const std::size_t k = g.index(ix, iy);
          for (auto [dx, dy] : offsets) {
            // Both orientations of each offset from the anchor.
            for (int sgn : {1, -1}) {
              const int jx = ix + sgn * dx, jy = iy + sgn * dy;
              if (jx < 0 || jy < 0 || jx >= g.nx || jy >= g.ny) continue;
              const std::size_t m = g.index(jx, jy);
              const double v = std::norm(g1[k] - g1[m]) + std::norm(g2[k] - g2[m]);
              best = std::max(best, v);
            }
          }
        }
        row_max[ri] = best;
      },
      threads);
  return std::sqrt(*std::max_element(row_max.begin(), row_max.end()));
}

double c1_norm(const GridFunction& f, const Disc& b) {
  std::vector<Complex> d1, d2;
  if (f.has_gradients()) {
    d1 = *f.grad1;
    d2 = *f.grad2;
  } else {
    std::tie(d1, d2) = central_gradient(f, f.values);
  }
  double m = 0.0;
  for (int iy = 0; iy < f.ny; ++iy) {
    for (int ix = 0; ix < f.nx; ++ix) {
      if (!b.contains(f.node(ix, iy))) continue;
      const std::size_t k = f.index(ix, iy);
      m = std::max({m, std::abs(f.values[k]), std::sqrt(std::norm(d1[k]) + std::norm(d2[k]))});
    }
  }
  return m;
}

}  // namespace ecap
