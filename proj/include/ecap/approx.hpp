#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ecap/elliptic.hpp"
#include "ecap/grid.hpp"
#include "ecap/oscillation.hpp"

namespace ecap {

/// Boolean raster of a compact set X. Cell (ix, iy) is the square of side `spacing` centered at
/// node origin + h (ix + i iy); occupancy is row-major with iy outer.
struct CompactSetMask {
  Point origin;
  double spacing = 1.0;
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> occupancy;
  /// Construction record of cheese sets: the outer disc first, then the removed holes.
  std::vector<Disc> construction;

  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * nx + ix;
  }
  Point node(int ix, int iy) const noexcept { return origin + spacing * Point(ix, iy); }
  bool in(int ix, int iy) const noexcept {
    return ix >= 0 && iy >= 0 && ix < nx && iy < ny && occupancy[index(ix, iy)] != 0;
  }
  std::size_t count() const noexcept;

  /// At least one occupied cell, none within 2 cells of the raster frame.
  void check() const;
};

/// Occupancy of every node x with pred(x) true.
CompactSetMask rasterize(Point origin, double spacing, int nx, int ny,
                         const std::function<bool(Point)>& pred);

/// Closed outer disc minus `n_holes` disjoint open discs. Holes keep two cells of clearance
/// from each other and from the outer circle. Radii are hole_scale * R / sqrt(n_holes) times a
/// uniform factor in [1/2, 1). The raster covers the outer disc with a 4-cell frame.
/// Throws PlacementFailed when a hole cannot be placed within 10^4 attempts.
CompactSetMask make_swiss_cheese(std::uint64_t seed, const Disc& outer, int n_holes,
                                 double hole_scale, double spacing);

struct CapacityInterval {
  double lower = 0.0;
  double upper = 0.0;
  int curves = 0;       ///< closed boundary curves found
  int points = 0;       ///< size of the sampled measure
  bool clamped = false; ///< lower exceeded upper and was clamped
};

/// Two-sided capacity bracket for the region B(a, r) \ X on the raster of X.
/// Lower: curvature bound of the arclength measure on the region's boundary curves
/// (marching squares, 64 arclength-uniform samples per curve). Upper: the region's diameter.
/// Throws DiscOutsideGrid when B(a, r) does not fit two cells inside the raster.
CapacityInterval capacity_interval(const CompactSetMask& x, const Disc& region, int threads = 0);

/// Occupied cells with an unoccupied 8-neighbor that are not 8-adjacent to the unbounded
/// complement component (4-connected flood fill from the frame).
CompactSetMask inner_boundary(const CompactSetMask& x);

struct DiscRecord {
  Point center;
  double radius = 0.0;
  Complex oscillation;
  double omega = 0.0;
  CapacityInterval capacity;
  double ratio_lower = 0.0;  ///< |O| / (omega cap_lower), +inf when flagged
  double ratio_upper = 0.0;  ///< |O| / (omega cap_upper)
  /// |O| is significant while B(a, kr) \ X has zero capacity.
  bool infinite = false;
};

struct CriterionReport {
  Complex c11, c12, c22;
  std::string function_id;
  double k = 1.0;
  std::vector<double> radii;
  std::vector<Point> centers;
  /// Center-major, radius-minor order.
  std::vector<DiscRecord> records;
  /// Max ratio_lower over centers, per radius.
  std::vector<double> max_ratio;
  /// Median and 90% quantile of the finite ratio_lower values.
  double median_ratio = 0.0;
  double q90_ratio = 0.0;
  int infinite_count = 0;
  static constexpr const char* caveat =
      "capacities are bracketed only up to unknown absolute constants; ratios are trends, not a verdict";
};

struct ScanOptions {
  double k = 1.0;
  std::string function_id = "f";
  /// |O| below significance * c1_norm(f, B) counts as zero.
  double significance = 1e-6;
  /// omega(r) = A * (modulus of continuity of grad f at r).
  double omega_scale = 1.0;
  int threads = 0;
};

/// Oscillation against omega(r) * capacity over every (center, radius) pair.
/// omega(r) is A times the Euclidean combination of the moduli of continuity of d/dx1 f and d/dx2 f.
/// Throws InvalidArgument (k < 1, radii not positive), ResolutionTooCoarse (spacing of f or X
/// above r_min/32) and DiscOutsideGrid.
CriterionReport criterion_scan(const EllipticOperator& op, const GridFunction& f,
                               const CompactSetMask& x, const std::vector<double>& radii,
                               const std::vector<Point>& centers, const ScanOptions& options = {});

}  // namespace ecap
