#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ecap/elliptic.hpp"
#include "ecap/grid.hpp"

namespace ecap {

/// Real samples on a rectangular window [ix0, ix0+width) x [iy0, iy0+height) of a parent grid;
/// zero outside the window.
struct Window {
  int ix0 = 0, iy0 = 0, width = 0, height = 0;
  std::vector<double> values;

  double at(int ix, int iy) const noexcept {
    const int u = ix - ix0, v = iy - iy0;
    if (u < 0 || v < 0 || u >= width || v >= height) return 0.0;
    return values[static_cast<std::size_t>(v) * width + u];
  }
  bool empty() const noexcept { return values.empty(); }
};

/// Mollifier phi_delta(x) = phi_1(x/delta)/delta^2 with phi_1 = (3/pi)(1-|x|^2)^2 on the unit disc,
/// sampled at multiples of `spacing` around 0 and renormalized so the sample sum times h^2 is 1.
GridFunction mollifier(double delta, double spacing);

struct PartitionCell {
  int j1 = 0, j2 = 0;
  Point center;  ///< a_j = (j1 + i j2) delta
  Window phi;    ///< supported in B(a_j, delta)
  Window psi;    ///< phi_delta * phi_delta * phi_j, supported in B(a_j, 3 delta)
};

struct PartitionOfUnity {
  double delta = 0.0;
  GridFunction geometry;  ///< shared grid (values unused)
  Point box_lo, box_hi;   ///< region on which sum phi_j = 1
  std::vector<PartitionCell> cells;
  /// max_j sup |grad phi_j| * delta (central differences).
  double gradient_constant = 0.0;
};

/// delta-partition of unity on the lattice delta*Z^2: Shepard-normalized translates of
/// (1 - |x|^2/delta^2)^2, plus the smoothed indices psi_j.
/// Throws BoxTooSmall (side < 4 delta), ResolutionTooCoarse (h > delta/16) and
/// InvalidArgument when the grid does not contain the box inflated by 4 delta.
PartitionOfUnity build_partition(const GridFunction& geometry, Point box_lo, Point box_hi,
                                 double delta);

/// Weight w with h^2 (w s(x) + sum_{y != x} Phi(x - y) s(y)) matching the integral of Phi s
/// up to O(h^4 log h) for smooth s: the lattice limit of the integral of Phi over a square
/// of cells minus the punctured node sum, at spacing h.
Complex lattice_self_weight(const EllipticOperator& op, double h);

/// Grid convolution with the fundamental solution: out(x) = h^2 sum_y Phi(x - y) s(y),
/// with lattice_self_weight at y = x. FFT based; the kernel transform is computed once per
/// (operator, grid).
class PotentialConvolver {
 public:
  PotentialConvolver(const EllipticOperator& op, const GridFunction& geometry);
  ~PotentialConvolver();
  PotentialConvolver(const PotentialConvolver&) = delete;
  PotentialConvolver& operator=(const PotentialConvolver&) = delete;

  /// Density on the full grid.
  std::vector<Complex> apply(std::span<const Complex> density) const;
  /// Density given on a window (row-major, width x height) of the grid.
  std::vector<Complex> apply(int ix0, int iy0, int width, int height,
                             std::span<const Complex> density) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Vitushkin localization Phi * (phi L f) for a C^1 index phi supported in `support`.
/// Throws SupportLeak when |phi| > 1e-12 at a node outside the open support disc.
GridFunction vitushkin_localize(const EllipticOperator& op, const GridFunction& f,
                                std::span<const Complex> phi, Point support_center,
                                double support_radius);

/// A finite complex combination of point masses.
struct PointDistribution {
  std::vector<Point> points;
  std::vector<Complex> weights;

  Complex total() const;
};

struct LocalizedPiece {
  int j1 = 0, j2 = 0;
  Point center;
  /// psi_j L f vanishes identically; `values` is then empty.
  bool zero = true;
  GridFunction values;
  /// psi_j L f h^2 at the grid nodes: the distribution whose potential is this piece.
  PointDistribution source;
};

/// f_j = Phi * (psi_j L f) for every cell. Throws CoverageGap when sum psi_j differs from 1
/// (beyond 1e-8) at a node where L f does not vanish.
std::vector<LocalizedPiece> localized_pieces(const EllipticOperator& op, const GridFunction& f,
                                             const PartitionOfUnity& partition, int threads = 0);

struct LaurentCoeffs {
  Point center;
  Complex c0;
  /// higher[m-1] = (c_m^1, c_m^2), m = 1..m_max.
  std::vector<std::pair<Complex, Complex>> higher;
  bool repeated = false;

  std::pair<Complex, Complex> c1() const { return higher.empty() ? std::pair<Complex, Complex>{} : higher[0]; }
};

LaurentCoeffs laurent_coeffs(const EllipticOperator& op, const PointDistribution& t, Point a,
                             int m_max = 8);

/// The distribution psi_j L f h^2 of a grid function pairing, restricted to nonzero nodes.
PointDistribution grid_distribution(const GridFunction& density);

/// sum_k w_k Phi(z - p_k).
Complex potential(const EllipticOperator& op, const PointDistribution& t, Point z);
/// sum_k w_k (Phi(z - p_k) - Phi(z - a)), evaluated without cancellation in the far field.
Complex potential_minus_monopole(const EllipticOperator& op, const PointDistribution& t, Point a,
                                 Point z);
/// sum_{m=1..order} of the Laurent terms (the c0 term excluded).
Complex laurent_tail(const EllipticOperator& op, const LaurentCoeffs& c, Point z, int order);
/// Characteristic gradient of laurent_tail.
std::pair<Complex, Complex> laurent_tail_gradient(const EllipticOperator& op, const LaurentCoeffs& c,
                                                  Point z, int order);

/// c_0 = int f L psi by parts: -c11 int d_1 f d_2 psi (distinct roots) or -c11 int d_1 f d_1 psi
/// (repeated root). Throws MissingGradients.
Complex c0_by_parts(const EllipticOperator& op, const GridFunction& f, const Window& psi);

struct AnnulusSpec {
  double support_radius = 1.0;
  double k4 = 8.0;
  /// Annuli start at k4 * support_radius unless a larger inner radius is given.
  double inner = 0.0;
  int octaves = 3;
  int radii_per_octave = 6;
  int angles = 64;
};

struct SlopeFit {
  double slope = 0.0;
  double half_width95 = 0.0;  ///< 95% confidence half-width of the slope
  int samples = 0;
};

struct FarFieldReport {
  SlopeFit full;              ///< |grad^c g|
  SlopeFit monopole_removed;  ///< |grad^c (g - c0 Phi)|
  SlopeFit second_order;      ///< |grad^c (g - c0 Phi - first Laurent terms)|
};

/// Log-log slopes of the far-field gradients of g = Phi * t over dyadic annuli around coeffs.center.
/// Throws AnnulusInsideSupport when the inner radius is <= k4 * support_radius.
FarFieldReport farfield_decay_check(const EllipticOperator& op, const PointDistribution& t,
                                    const LaurentCoeffs& coeffs, const AnnulusSpec& annuli);

/// Same check on a grid function using central-difference gradients at the grid nodes
/// falling inside the annuli.
FarFieldReport farfield_decay_check(const EllipticOperator& op, const GridFunction& g,
                                    const LaurentCoeffs& coeffs, const AnnulusSpec& annuli);

/// Least squares slope of log y against log x with a 95% interval.
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace ecap
