#pragma once

#include "ecap/elliptic.hpp"
#include "ecap/grid.hpp"

namespace ecap {

/// Open disc B(center, radius).
struct Disc {
  Point center;
  double radius = 1.0;

  /// The concentric disc with radius scaled by `factor`.
  Disc scaled(double factor) const { return {center, radius * factor}; }
  bool contains(Point x) const { return std::abs(x - center) < radius; }
  void check() const;
};

struct OscillationOptions {
  int n_boundary = 256;
  int n_radial = 64;
  /// Recompute with 2*n_boundary and throw QuadratureUnderresolved on a change > 1e-3 relative.
  bool check_resolution = true;
};

/// L-oscillation of f over b: boundary mean of f L(x-a)/r^2 minus (c11+c22)/(2 pi r^2) times
/// the area integral. Trapezoid rule on the circle, Gauss-Legendre x trapezoid polar rule
/// for the area term, Keys cubic interpolation off the grid.
/// Throws DiscOutsideGrid unless 1.05*b keeps a two-node margin inside the grid.
Complex l_oscillation(const EllipticOperator& op, const GridFunction& f, const Disc& b,
                      const OscillationOptions& options = {});

/// (r^2 - |x-a|^2) / (4 pi r^2) inside b, 0 outside.
double psi_weight(const Disc& b, Point x);

/// Integral over b of psi_weight * (L f), with L f from apply_L. Cells cut by the circle
/// are subdivided 8x8; interior cells use the exact cell integral of psi.
Complex oscillation_via_psi(const EllipticOperator& op, const GridFunction& f, const Disc& b);

/// Same as above, from an already computed L f.
Complex oscillation_via_psi(const GridFunction& lf, const Disc& b);

/// max |grad f(x) - grad f(y)| over sampled node pairs with |x - y| <= r.
/// Node set depends only on the grid, so the estimate is nondecreasing in r.
/// Throws MissingGradients.
double modulus_of_continuity(const GridFunction& g, double r, int threads = 0);

/// max(sup |f|, sup |grad f|) over the grid nodes inside b. Uses the stored gradients when
/// present, central differences otherwise.
double c1_norm(const GridFunction& f, const Disc& b);

}  // namespace ecap
