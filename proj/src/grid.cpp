#include "ecap/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ecap/error.hpp"

namespace ecap {

bool GridFunction::contains_disc(Point center, double radius, int pad) const noexcept {
  const int m = invalid_margin + pad;
  const Point lo = node(m, m);
  const Point hi = node(nx - 1 - m, ny - 1 - m);
  return center.real() - radius >= lo.real() && center.real() + radius <= hi.real() &&
         center.imag() - radius >= lo.imag() && center.imag() + radius <= hi.imag();
}

void GridFunction::check() const {
  if (nx <= 0 || ny <= 0) throw Error(ErrorKind::InvalidArgument, "grid needs nx, ny > 0");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive and finite");
  }
  if (values.size() != size()) throw Error(ErrorKind::InvalidArgument, "values length != nx*ny");
  if (grad1 && grad1->size() != size()) throw Error(ErrorKind::InvalidArgument, "grad1 length");
  if (grad2 && grad2->size() != size()) throw Error(ErrorKind::InvalidArgument, "grad2 length");
}

GridFunction zeros_like(const GridFunction& like) {
  GridFunction out;
  out.origin = like.origin;
  out.spacing = like.spacing;
  out.nx = like.nx;
  out.ny = like.ny;
  out.values.assign(like.size(), Complex{});
  return out;
}

GridFunction sample(Point origin, double spacing, int nx, int ny,
                    const std::function<Complex(Point)>& fn,
                    const std::function<std::pair<Complex, Complex>(Point)>& grad) {
  GridFunction g;
  g.origin = origin;
  g.spacing = spacing;
  g.nx = nx;
  g.ny = ny;
  g.values.resize(g.size());
  if (grad) {
    g.grad1.emplace(g.size());
    g.grad2.emplace(g.size());
  }
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const Point x = g.node(ix, iy);
      const std::size_t k = g.index(ix, iy);
      g.values[k] = fn(x);
      if (grad) {
        auto [d1, d2] = grad(x);
        (*g.grad1)[k] = d1;
        (*g.grad2)[k] = d2;
      }
    }
  }
  g.check();
  return g;
}

namespace {

// Keys kernel weights for fractional offset t in [0,1) at nodes -1, 0, 1, 2.
inline void keys_weights(double t, double w[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  w[0] = -0.5 * t3 + t2 - 0.5 * t;
  w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
  w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
  w[3] = 0.5 * t3 - 0.5 * t2;
}

}  // namespace

Complex interpolate(const GridFunction& f, std::span<const Complex> field, Point x) {
  const double u = (x.real() - f.origin.real()) / f.spacing;
  const double v = (x.imag() - f.origin.imag()) / f.spacing;
  int ix = static_cast<int>(std::floor(u));
  int iy = static_cast<int>(std::floor(v));
  // Keep the 4x4 stencil inside; points on the last row/column use the cell below.
  ix = std::clamp(ix, 1, f.nx - 3);
  iy = std::clamp(iy, 1, f.ny - 3);
  double wx[4], wy[4];
  keys_weights(u - ix, wx);
  keys_weights(v - iy, wy);
  Complex acc{};
  for (int b = 0; b < 4; ++b) {
    const Complex* row = field.data() + f.index(ix - 1, iy - 1 + b);
    Complex r = wx[0] * row[0] + wx[1] * row[1] + wx[2] * row[2] + wx[3] * row[3];
    acc += wy[b] * r;
  }
  return acc;
}

Complex interpolate(const GridFunction& f, Point x) { return interpolate(f, f.values, x); }

std::pair<std::vector<Complex>, std::vector<Complex>> central_gradient(const GridFunction& g,
                                                                       std::span<const Complex> field) {
  std::vector<Complex> d1(g.size()), d2(g.size());
  const double inv2h = 0.5 / g.spacing;
  for (int iy = 1; iy + 1 < g.ny; ++iy) {
    for (int ix = 1; ix + 1 < g.nx; ++ix) {
      const std::size_t k = g.index(ix, iy);
      d1[k] = (field[k + 1] - field[k - 1]) * inv2h;
      d2[k] = (field[k + g.nx] - field[k - g.nx]) * inv2h;
    }
  }
  return {std::move(d1), std::move(d2)};
}

double max_abs(const GridFunction& f, std::span<const Complex> field, Point center, double radius) {
  double m = 0.0;
  for (int iy = 0; iy < f.ny; ++iy) {
    for (int ix = 0; ix < f.nx; ++ix) {
      if (radius > 0.0 && std::abs(f.node(ix, iy) - center) >= radius) continue;
      m = std::max(m, std::abs(field[f.index(ix, iy)]));
    }
  }
  return m;
}

}  // namespace ecap

// ---------------------------------------------------------------------------

#include "ecap/quadrature.hpp"

namespace ecap {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre needs n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

}  // namespace ecap
