#include "ecap/menger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ecap/error.hpp"
#include "ecap/parallel.hpp"

namespace ecap {

namespace {

constexpr double kCollinearFloor = 1e-30;

// Neumaier's variant of compensated summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Point> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.size() != weights_.size()) {
    throw Error(ErrorKind::InvalidArgument, "points and weights differ in length");
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].real()) || !std::isfinite(points_[i].imag())) {
      throw Error(ErrorKind::InvalidArgument, "non-finite point");
    }
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw Error(ErrorKind::InvalidArgument, "weights must be finite and >= 0");
    }
    acc.add(weights_[i]);
  }
  total_ = acc.value();
}

DiscreteMeasure DiscreteMeasure::scaled(double t) const {
  std::vector<double> w(weights_);
  for (double& v : w) v *= t;
  return {points_, std::move(w)};
}

DiscreteMeasure DiscreteMeasure::without(std::size_t i) const {
  std::vector<Point> p(points_);
  std::vector<double> w(weights_);
  p.erase(p.begin() + static_cast<std::ptrdiff_t>(i));
  w.erase(w.begin() + static_cast<std::ptrdiff_t>(i));
  return {std::move(p), std::move(w)};
}

double menger_curvature(Point z, Point w, Point xi) {
  // Canonical argument order makes the result bitwise symmetric.
  auto less = [](Point p, Point q) { return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag(); };
  if (less(w, z)) std::swap(z, w);
  if (less(xi, w)) std::swap(w, xi);
  if (less(w, z)) std::swap(z, w);
  const Point a = w - z, b = xi - z, c = xi - w;
  const double a2 = std::norm(a), b2 = std::norm(b), c2 = std::norm(c);
  const double den = a2 * b2 * c2;
  if (den == 0.0) return 0.0;
  const double cross = a.real() * b.imag() - a.imag() * b.real();
  const double curv2 = 4.0 * cross * cross / den;
  if (curv2 * std::min({a2, b2, c2}) < kCollinearFloor) return 0.0;
  return std::sqrt(curv2);
}

double curvature_energy(const DiscreteMeasure& mu, int threads) {
  const std::size_t n = mu.size();
  if (n < 3) return 0.0;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = mu.points()[i].real();
    ys[i] = mu.points()[i].imag();
  }
  const double* x = xs.data();
  const double* y = ys.data();
  const double* w = mu.weights().data();

  // per_outer[i] = w_i * sum_{i<j<k} w_j w_k c^2(i,j,k); each entry is computed by one worker
  // in a fixed order, and the entries are combined in index order below.
  std::vector<double> per_outer(n, 0.0);
  parallel_for(
      n - 2,
      [&](std::size_t i) {
        const double xi = x[i], yi = y[i];
        CompensatedSum outer;
        for (std::size_t j = i + 1; j + 1 < n; ++j) {
          const double ax = x[j] - xi, ay = y[j] - yi;
          const double dij = ax * ax + ay * ay;
          const double xj = x[j], yj = y[j];
          double lane[4] = {0.0, 0.0, 0.0, 0.0};
          std::size_t k = j + 1;
          auto term = [&](std::size_t kk) {
            const double bx = x[kk] - xi, by = y[kk] - yi;
            const double cx = x[kk] - xj, cy = y[kk] - yj;
            const double dik = bx * bx + by * by;
            const double djk = cx * cx + cy * cy;
            const double cross = ax * by - ay * bx;
            const double den = dij * dik * djk;
            const double c2 = 4.0 * cross * cross / den;
            const double smallest = std::min(dij, std::min(dik, djk));
            const bool keep = den > 0.0 && c2 * smallest >= kCollinearFloor;
            return keep ? w[kk] * c2 : 0.0;
          };
          for (; k + 4 <= n; k += 4) {
            lane[0] += term(k);
            lane[1] += term(k + 1);
            lane[2] += term(k + 2);
            lane[3] += term(k + 3);
          }
          for (; k < n; ++k) lane[0] += term(k);
          outer.add(w[j] * ((lane[0] + lane[1]) + (lane[2] + lane[3])));
        }
        per_outer[i] = w[i] * outer.value();
      },
      threads);

  CompensatedSum total;
  for (double v : per_outer) total.add(v);
  return 6.0 * total.value();
}

GrowthProfile growth_profile(const DiscreteMeasure& mu, int threads) {
  const std::size_t n = mu.size();
  GrowthProfile profile;
  if (n == 0) return profile;

  struct Row {
    std::vector<double> dist;  // sorted distances to the other points
    std::vector<double> mass;  // w_i + cumulative weight up to dist[k]
  };
  std::vector<Row> rows(n);
  struct Best {
    double ratio = 0.0;
    double radius = 0.0;
  };
  std::vector<Best> best(n);
  auto pts = mu.points();
  auto wts = mu.weights();

  parallel_for(
      n,
      [&](std::size_t i) {
        std::vector<std::pair<double, double>> others;
        others.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) others.emplace_back(std::abs(pts[j] - pts[i]), wts[j]);
        }
        std::sort(others.begin(), others.end());
        Row& row = rows[i];
        double acc = wts[i];
        for (std::size_t k = 0; k < others.size(); ++k) {
          acc += others[k].second;
          // Only the last entry of a run of equal distances carries the full closed-ball mass.
          if (k + 1 < others.size() && others[k + 1].first == others[k].first) continue;
          if (others[k].first <= 0.0) continue;
          row.dist.push_back(others[k].first);
          row.mass.push_back(acc);
          const double ratio = acc / others[k].first;
          if (ratio > best[i].ratio) best[i] = {ratio, others[k].first};
        }
      },
      threads);

  double min_gap = std::numeric_limits<double>::infinity();
  double diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].dist.empty()) {
      min_gap = std::min(min_gap, rows[i].dist.front());
      diameter = std::max(diameter, rows[i].dist.back());
    }
    if (best[i].ratio > profile.constant) {
      profile.constant = best[i].ratio;
      profile.witness_center = pts[i];
      profile.witness_radius = best[i].radius;
    }
  }
  if (diameter == 0.0) {
    // Atoms only: mu(B(z, r))/r blows up as r -> 0.
    profile.unbounded = mu.total() > 0.0;
    profile.constant = profile.unbounded ? std::numeric_limits<double>::infinity() : 0.0;
    profile.witness_center = pts[0];
    return profile;
  }

  for (double r = std::exp2(std::ceil(std::log2(diameter))); r >= min_gap; r *= 0.5) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& d = rows[i].dist;
      auto it = std::upper_bound(d.begin(), d.end(), r);
      const double mass = it == d.begin() ? wts[i] : rows[i].mass[static_cast<std::size_t>(it - d.begin()) - 1];
      worst = std::max(worst, mass / r);
    }
    profile.small_scale.emplace_back(r, worst);
  }
  return profile;
}

CapacityEstimate capacity_estimate(const DiscreteMeasure& mu, int threads) {
  if (!(mu.total() > 0.0)) throw Error(ErrorKind::ZeroMeasure, "measure has zero mass");
  CapacityEstimate est;
  est.mass = mu.total();
  const GrowthProfile growth = growth_profile(mu, threads);
  est.growth = growth.constant;
  if (growth.unbounded) return est;
  est.energy = curvature_energy(mu, threads);
  const double by_growth = 1.0 / growth.constant;
  const double by_energy = est.energy > 0.0 ? std::sqrt(est.mass / est.energy)
                                            : std::numeric_limits<double>::infinity();
  est.scale = std::min(by_growth, by_energy);
  est.value = est.scale * est.mass;
  return est;
}

double capacity_lower_bound(const DiscreteMeasure& mu, int threads) {
  return capacity_estimate(mu, threads).value;
}

DiscreteMeasure pushforward_linear(const DiscreteMeasure& mu, double m11, double m12, double m21,
                                   double m22) {
  const double det = m11 * m22 - m12 * m21;
  const double frob2 = m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22;
  if (!(std::abs(det) > 1e-14 * frob2)) throw Error(ErrorKind::SingularMap, "map is singular");
  std::vector<Point> mapped;
  mapped.reserve(mu.size());
  for (Point p : mu.points()) {
    mapped.emplace_back(m11 * p.real() + m12 * p.imag(), m21 * p.real() + m22 * p.imag());
  }
  return {std::move(mapped), std::vector<double>(mu.weights().begin(), mu.weights().end())};
}

}  // namespace ecap
