#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ecap/types.hpp"

namespace ecap {

/// Complex samples on a uniform axis-aligned grid. Node (ix, iy) sits at
/// origin + ix*h + i*iy*h; storage is row-major (iy outer).
struct GridFunction {
  Point origin{0.0, 0.0};
  double spacing = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<Complex> values;
  /// Optional samples of d/dx1 f and d/dx2 f.
  std::optional<std::vector<Complex>> grad1;
  std::optional<std::vector<Complex>> grad2;
  /// Width of the boundary ring whose values are not meaningful (e.g. after a stencil).
  int invalid_margin = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * nx + ix;
  }
  Point node(int ix, int iy) const noexcept {
    return origin + Point(ix * spacing, iy * spacing);
  }
  Complex& at(int ix, int iy) { return values[index(ix, iy)]; }
  const Complex& at(int ix, int iy) const { return values[index(ix, iy)]; }

  bool has_gradients() const noexcept { return grad1.has_value() && grad2.has_value(); }

  /// Upper corner of the sampled rectangle.
  Point extent() const noexcept { return node(nx - 1, ny - 1); }

  /// True when the closed disc B(center, radius) stays `pad` nodes away from the
  /// edge of the valid region.
  bool contains_disc(Point center, double radius, int pad = 0) const noexcept;

  /// Validates the size/spacing invariants; throws Error(InvalidArgument).
  void check() const;
};

/// Same geometry as `like`, all samples zero, no gradients.
GridFunction zeros_like(const GridFunction& like);

/// Samples `fn` at every node. When `grad` is given it must return (d/dx1, d/dx2).
GridFunction sample(Point origin, double spacing, int nx, int ny,
                    const std::function<Complex(Point)>& fn,
                    const std::function<std::pair<Complex, Complex>(Point)>& grad = {});

/// Keys cubic-convolution interpolation (a = -1/2). Reproduces quadratics exactly.
/// The 4x4 stencil must lie inside the grid.
Complex interpolate(const GridFunction& f, Point x);
Complex interpolate(const GridFunction& f, std::span<const Complex> field, Point x);

/// Second-order central differences d/dx1, d/dx2 of `field`; boundary ring set to zero.
std::pair<std::vector<Complex>, std::vector<Complex>> central_gradient(const GridFunction& geometry,
                                                                       std::span<const Complex> field);

/// Max |value| over nodes at distance < radius from center (all nodes when radius <= 0).
double max_abs(const GridFunction& f, std::span<const Complex> field, Point center = {},
               double radius = 0.0);

}  // namespace ecap
