#pragma once

#include <span>
#include <string>
#include <vector>

#include "ecap/types.hpp"

namespace ecap {

/// Weighted planar point cloud standing in for a positive measure.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  /// Throws InvalidArgument on negative/non-finite weights, non-finite points or length mismatch.
  DiscreteMeasure(std::vector<Point> points, std::vector<double> weights);

  std::span<const Point> points() const noexcept { return points_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double total() const noexcept { return total_; }
  std::size_t size() const noexcept { return points_.size(); }

  /// Same points, weights multiplied by t >= 0.
  DiscreteMeasure scaled(double t) const;
  /// Drops point i.
  DiscreteMeasure without(std::size_t i) const;

 private:
  std::vector<Point> points_;
  std::vector<double> weights_;
  double total_ = 0.0;
};

/// Linear-growth certificate mu(B(z, r)) <= constant * r over a finite family of closed balls:
/// centers at the support points, radii at the positive pairwise distances. The supremum over
/// all balls can exceed the family value by at most a factor 2.
struct GrowthProfile {
  double constant = 0.0;
  /// True when no positive radius exists (a single atom): no linear growth at all.
  bool unbounded = false;
  Point witness_center;
  double witness_radius = 0.0;
  /// (r, max_z mu(B(z, r)) / r) for dyadic r from the diameter down to the smallest gap.
  std::vector<std::pair<double, double>> small_scale;
};

/// Reciprocal circumradius; 0 for coincident or (numerically) collinear triples.
double menger_curvature(Point z, Point w, Point xi);

/// Sum over ordered triples of distinct indices of w_i w_j w_k c(p_i, p_j, p_k)^2.
/// The i < j < k space is processed per outer index with fixed-order accumulation, so the
/// result does not depend on `threads`.
double curvature_energy(const DiscreteMeasure& mu, int threads = 0);

GrowthProfile growth_profile(const DiscreteMeasure& mu, int threads = 0);

/// Intermediate quantities of the curvature capacity bound.
struct CapacityEstimate {
  double value = 0.0;
  double scale = 0.0;  ///< t* = min(1/A0, sqrt(|mu| / c^2(mu)))
  double growth = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  /// The bound holds only up to the absolute constants of the curvature characterization.
  static constexpr const char* caveat = "lower bound up to unspecified absolute constants";
};

/// Largest t with t*mu of growth <= 1 and c^2(t mu) <= |t mu|; returns t*|mu|.
/// Throws ZeroMeasure.
CapacityEstimate capacity_estimate(const DiscreteMeasure& mu, int threads = 0);
double capacity_lower_bound(const DiscreteMeasure& mu, int threads = 0);

/// Image of mu under x -> M x (weights kept). Throws SingularMap when |det M| <= 1e-14 |M|_F^2.
DiscreteMeasure pushforward_linear(const DiscreteMeasure& mu, double m11, double m12, double m21,
                                   double m22);

}  // namespace ecap
