#include "ecap/approx.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "ecap/error.hpp"
#include "ecap/menger.hpp"
#include "ecap/parallel.hpp"

namespace ecap {

std::size_t CompactSetMask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(occupancy.begin(), occupancy.end(), [](auto v) { return v != 0; }));
}

void CompactSetMask::check() const {
  if (nx <= 0 || ny <= 0 || !(spacing > 0.0) || occupancy.size() != static_cast<std::size_t>(nx) * ny) {
    throw Error(ErrorKind::InvalidArgument, "malformed mask geometry");
  }
  if (count() == 0) throw Error(ErrorKind::InvalidArgument, "mask has no occupied cell");
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (!in(ix, iy)) continue;
      if (ix < 2 || iy < 2 || ix >= nx - 2 || iy >= ny - 2) {
        throw Error(ErrorKind::InvalidArgument, "occupied cells must stay 2 cells inside the raster frame");
      }
    }
}

CompactSetMask rasterize(Point origin, double spacing, int nx, int ny, const std::function<bool(Point)>& pred) {
  CompactSetMask m;
  m.origin = origin;
  m.spacing = spacing;
  m.nx = nx;
  m.ny = ny;
  m.occupancy.assign(static_cast<std::size_t>(nx) * ny, 0);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) m.occupancy[m.index(ix, iy)] = pred(m.node(ix, iy)) ? 1 : 0;
  return m;
}

CompactSetMask make_swiss_cheese(std::uint64_t seed, const Disc& outer, int n_holes, double hole_scale,
                                 double spacing) {
  outer.check();
  if (n_holes < 0) throw Error(ErrorKind::InvalidArgument, "n_holes must be >= 0");
  if (!(hole_scale > 0.0 && hole_scale < 1.0)) throw Error(ErrorKind::InvalidArgument, "hole_scale must lie in (0, 1)");
  if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidArgument, "spacing must be positive");

  // Uniform doubles from the top 53 bits, so the stream is identical on every platform.
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  const double big_r = outer.radius;
  const double base = hole_scale * big_r / std::sqrt(std::max(n_holes, 1));
  const double gap = 2.0 * spacing;
  std::vector<Disc> holes;
  for (int k = 0; k < n_holes; ++k) {
    const double rho = base * (0.5 + 0.5 * uniform());
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const Point c = outer.center + big_r * Point(2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0);
      if (std::abs(c - outer.center) + rho + gap > big_r) continue;
      placed = std::all_of(holes.begin(), holes.end(),
                           [&](const Disc& d) { return std::abs(c - d.center) >= rho + d.radius + gap; });
      if (placed) holes.push_back({c, rho});
    }
    if (!placed) throw Error(ErrorKind::PlacementFailed, "could not place hole " + std::to_string(k));
  }

  const int half = static_cast<int>(std::ceil(big_r / spacing)) + 4;
  const Point origin = outer.center - spacing * Point(half, half);
  CompactSetMask m = rasterize(origin, spacing, 2 * half + 1, 2 * half + 1, [&](Point x) {
    if (std::abs(x - outer.center) > big_r) return false;
    return std::none_of(holes.begin(), holes.end(), [&](const Disc& d) { return d.contains(x); });
  });
  m.construction.push_back(outer);
  m.construction.insert(m.construction.end(), holes.begin(), holes.end());
  return m;
}

namespace {

double cross(Point o, Point a, Point b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

double hull_diameter(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) return 0.0;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double d = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) d = std::max(d, std::abs(hull[i] - hull[j]));
  return d;
}

// Closed polylines through edge midpoints separating region nodes from the rest.
std::vector<std::vector<Point>> marching_squares(const std::vector<std::uint8_t>& in, int nx, int ny,
                                                 Point origin, double h) {
  auto inside = [&](int ix, int iy) { return in[static_cast<std::size_t>(iy) * nx + ix] != 0; };
  // Edge keys: 2 * node index + 0 for the edge to the right, + 1 for the edge upward.
  auto hkey = [&](int ix, int iy) { return 2 * (static_cast<std::int64_t>(iy) * nx + ix); };
  auto vkey = [&](int ix, int iy) { return 2 * (static_cast<std::int64_t>(iy) * nx + ix) + 1; };
  auto midpoint = [&](std::int64_t key) {
    const std::int64_t node = key / 2;
    const Point p = origin + h * Point(static_cast<double>(node % nx), static_cast<double>(node / nx));
    return key % 2 == 0 ? p + Point(0.5 * h, 0.0) : p + Point(0.0, 0.5 * h);
  };

  std::vector<std::pair<std::int64_t, std::int64_t>> segments;
  for (int iy = 0; iy + 1 < ny; ++iy)
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const bool b0 = inside(ix, iy), b1 = inside(ix + 1, iy), b2 = inside(ix + 1, iy + 1), b3 = inside(ix, iy + 1);
      const std::int64_t bottom = hkey(ix, iy), top = hkey(ix, iy + 1);
      const std::int64_t left = vkey(ix, iy), right = vkey(ix + 1, iy);
      const int code = b0 | (b1 << 1) | (b2 << 2) | (b3 << 3);
      switch (code) {
        case 0:
        case 15:
          break;
        case 1: case 14: segments.emplace_back(bottom, left); break;
        case 2: case 13: segments.emplace_back(bottom, right); break;
        case 4: case 11: segments.emplace_back(right, top); break;
        case 8: case 7: segments.emplace_back(top, left); break;
        case 3: case 12: segments.emplace_back(left, right); break;
        case 6: case 9: segments.emplace_back(bottom, top); break;
        case 5:  // diagonal pair b0, b2: each corner cut off on its own
          segments.emplace_back(bottom, left);
          segments.emplace_back(right, top);
          break;
        case 10:
          segments.emplace_back(bottom, right);
          segments.emplace_back(top, left);
          break;
        default:
          break;
      }
    }

  std::unordered_map<std::int64_t, std::vector<std::size_t>> at_edge;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    at_edge[segments[s].first].push_back(s);
    at_edge[segments[s].second].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<std::vector<Point>> curves;
  for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (used[s0]) continue;
    std::vector<Point> curve;
    std::size_t s = s0;
    std::int64_t key = segments[s0].first;
    for (;;) {
      used[s] = true;
      curve.push_back(midpoint(key));
      key = segments[s].first == key ? segments[s].second : segments[s].first;
      std::size_t next = s;
      for (std::size_t cand : at_edge[key])
        if (!used[cand]) next = cand;
      if (next == s) break;
      s = next;
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

constexpr int kSamplesPerCurve = 64;

// Arclength-uniform samples of a closed polyline, each carrying length / n.
void sample_curve(const std::vector<Point>& c, std::vector<Point>& pts, std::vector<double>& w) {
  const std::size_t n = c.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + std::abs(c[(i + 1) % n] - c[i]);
  const double length = cum[n];
  if (!(length > 0.0)) return;
  std::size_t seg = 0;
  for (int k = 0; k < kSamplesPerCurve; ++k) {
    const double s = (k + 0.5) * length / kSamplesPerCurve;
    while (cum[seg + 1] < s) ++seg;
    const double t = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
    pts.push_back(c[seg] + t * (c[(seg + 1) % n] - c[seg]));
    w.push_back(length / kSamplesPerCurve);
  }
}

}  // namespace

CapacityInterval capacity_interval(const CompactSetMask& x, const Disc& region, int threads) {
  region.check();
  const double h = x.spacing;
  const Point lo = x.node(2, 2), hi = x.node(x.nx - 3, x.ny - 3);
  if (region.center.real() - region.radius < lo.real() || region.center.imag() - region.radius < lo.imag() ||
      region.center.real() + region.radius > hi.real() || region.center.imag() + region.radius > hi.imag()) {
    throw Error(ErrorKind::DiscOutsideGrid, "capacity disc must fit two cells inside the mask raster");
  }
  std::vector<std::uint8_t> in(x.occupancy.size(), 0);
  std::vector<Point> corners;
  bool any = false;
  for (int iy = 0; iy < x.ny; ++iy) {
    int first = -1, last = -1;
    for (int ix = 0; ix < x.nx; ++ix) {
      if (x.in(ix, iy) || !region.contains(x.node(ix, iy))) continue;
      in[x.index(ix, iy)] = 1;
      if (first < 0) first = ix;
      last = ix;
    }
    if (first < 0) continue;
    any = true;
    for (int ix : {first, last})
      for (double sx : {-0.5, 0.5})
        for (double sy : {-0.5, 0.5}) corners.push_back(x.node(ix, iy) + h * Point(sx, sy));
  }
  CapacityInterval out;
  if (!any) return out;
  out.upper = hull_diameter(std::move(corners));

  std::vector<Point> pts;
  std::vector<double> w;
  const auto curves = marching_squares(in, x.nx, x.ny, x.origin, h);
  for (const auto& c : curves) sample_curve(c, pts, w);
  out.curves = static_cast<int>(curves.size());
  out.points = static_cast<int>(pts.size());
  out.lower = capacity_lower_bound(DiscreteMeasure(std::move(pts), std::move(w)), threads);
  if (out.lower > out.upper) {
    out.lower = out.upper;
    out.clamped = true;
  }
  return out;
}

CompactSetMask inner_boundary(const CompactSetMask& x) {
  const int nx = x.nx, ny = x.ny;
  // Unbounded complement component: 4-connected flood fill from the frame.
  std::vector<std::uint8_t> outside(x.occupancy.size(), 0);
  std::vector<std::pair<int, int>> stack;
  auto seed = [&](int ix, int iy) {
    if (!x.in(ix, iy) && !outside[x.index(ix, iy)]) {
      outside[x.index(ix, iy)] = 1;
      stack.emplace_back(ix, iy);
    }
  };
  for (int ix = 0; ix < nx; ++ix) seed(ix, 0), seed(ix, ny - 1);
  for (int iy = 0; iy < ny; ++iy) seed(0, iy), seed(nx - 1, iy);
  while (!stack.empty()) {
    const auto [ix, iy] = stack.back();
    stack.pop_back();
    if (ix > 0) seed(ix - 1, iy);
    if (ix + 1 < nx) seed(ix + 1, iy);
    if (iy > 0) seed(ix, iy - 1);
    if (iy + 1 < ny) seed(ix, iy + 1);
  }

  CompactSetMask out = x;
  out.construction.clear();
  std::fill(out.occupancy.begin(), out.occupancy.end(), 0);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (!x.in(ix, iy)) continue;
      bool boundary = false, touches_outside = false;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int jx = ix + dx, jy = iy + dy;
          if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) {
            boundary = touches_outside = true;
            continue;
          }
          if (x.in(jx, jy)) continue;
          boundary = true;
          if (outside[x.index(jx, jy)]) touches_outside = true;
        }
      if (boundary && !touches_outside) out.occupancy[x.index(ix, iy)] = 1;
    }
  return out;
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const double t = pos - i;
  return i + 1 < v.size() ? v[i] * (1 - t) + v[i + 1] * t : v[i];
}

// f with gradients attached; central differences (edge-extended) when f carries none.
GridFunction with_gradients(const GridFunction& f) {
  if (f.has_gradients()) return f;
  GridFunction g = f;
  auto [d1, d2] = central_gradient(f, f.values);
  for (auto* d : {&d1, &d2}) {
    auto& v = *d;
    for (int iy = 0; iy < f.ny; ++iy)
      for (int ix = 0; ix < f.nx; ++ix) {
        const int cx = std::clamp(ix, 1, f.nx - 2), cy = std::clamp(iy, 1, f.ny - 2);
        if (cx != ix || cy != iy) v[f.index(ix, iy)] = v[f.index(cx, cy)];
      }
  }
  g.grad1 = std::move(d1);
  g.grad2 = std::move(d2);
  return g;
}

}  // namespace

CriterionReport criterion_scan(const EllipticOperator& op, const GridFunction& f, const CompactSetMask& x,
                               const std::vector<double>& radii, const std::vector<Point>& centers,
                               const ScanOptions& options) {
  f.check();
  if (!(options.k >= 1.0)) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (!(options.omega_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "omega scale must be positive");
  if (radii.empty() || centers.empty()) throw Error(ErrorKind::InvalidArgument, "empty disc family");
  for (double r : radii)
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "radii must be positive");
  const double r_min = *std::min_element(radii.begin(), radii.end());
  if (f.spacing > r_min / 32.0 * (1 + 1e-12) || x.spacing > r_min / 32.0 * (1 + 1e-12)) {
    throw Error(ErrorKind::ResolutionTooCoarse, "spacing must be <= r_min/32");
  }
  for (Point a : centers)
    for (double r : radii) {
      if (!f.contains_disc(a, std::max(1.05 * r, options.k * r), 2)) {
        throw Error(ErrorKind::DiscOutsideGrid, "scan disc does not fit inside the grid");
      }
    }

  const GridFunction fg = with_gradients(f);
  std::vector<double> omega(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) omega[i] = options.omega_scale * modulus_of_continuity(fg, radii[i], options.threads);

  CriterionReport rep;
  rep.c11 = op.c11;
  rep.c12 = op.c12;
  rep.c22 = op.c22;
  rep.function_id = options.function_id;
  rep.k = options.k;
  rep.radii = radii;
  rep.centers = centers;
  rep.records.resize(centers.size() * radii.size());
  parallel_for(
      rep.records.size(),
      [&](std::size_t n) {
        const std::size_t ci = n / radii.size(), ri = n % radii.size();
        DiscRecord& d = rep.records[n];
        d.center = centers[ci];
        d.radius = radii[ri];
        const Disc b{d.center, d.radius};
        d.oscillation = l_oscillation(op, f, b);
        d.omega = omega[ri];
        d.capacity = capacity_interval(x, b.scaled(options.k), 1);
        const double mag = std::abs(d.oscillation);
        const bool significant = mag > options.significance * c1_norm(fg, b);
        auto ratio = [&](double cap) {
          if (!significant) return 0.0;
          const double den = d.omega * cap;
          return den > 0.0 ? mag / den : std::numeric_limits<double>::infinity();
        };
        d.ratio_lower = ratio(d.capacity.lower);
        d.ratio_upper = ratio(d.capacity.upper);
        d.infinite = significant && d.capacity.lower == 0.0;
      },
      options.threads);

  rep.max_ratio.assign(radii.size(), 0.0);
  std::vector<double> finite;
  for (std::size_t n = 0; n < rep.records.size(); ++n) {
    const DiscRecord& d = rep.records[n];
    rep.max_ratio[n % radii.size()] = std::max(rep.max_ratio[n % radii.size()], d.ratio_lower);
    if (d.infinite) ++rep.infinite_count;
    if (std::isfinite(d.ratio_lower)) finite.push_back(d.ratio_lower);
  }
  rep.median_ratio = quantile(finite, 0.5);
  rep.q90_ratio = quantile(finite, 0.9);
  return rep;
}

}  // namespace ecap
