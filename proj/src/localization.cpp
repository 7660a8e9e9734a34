#include "ecap/localization.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <mutex>

#include "ecap/error.hpp"
#include "ecap/parallel.hpp"
#include "ecap/quadrature.hpp"

namespace ecap {

namespace {

// FFTW's planner is not thread safe; execution with fftw_execute_dft is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline double pair_norm(std::pair<Complex, Complex> g) {
  return std::sqrt(std::norm(g.first) + std::norm(g.second));
}

Complex log1p_c(Complex u) {
  return {0.5 * std::log1p(2.0 * u.real() + std::norm(u)), std::atan2(u.imag(), 1.0 + u.real())};
}

}  // namespace

Complex lattice_self_weight(const EllipticOperator& op, double h) {
  // Phi(t y) = a log t + Phi(y) for t > 0.
  const Complex a = op.repeated ? Complex{} : op.k1 * static_cast<double>(1 + op.nu);

  // Central cell in polar coordinates: the radial integral is closed form.
  const QuadratureRule ang = gauss_legendre(32, -kPi / 4, kPi / 4);
  Complex total{};
  for (int oct = 0; oct < 4; ++oct)
    for (std::size_t q = 0; q < ang.nodes.size(); ++q) {
      const double t = ang.nodes[q];
      const double theta = t + oct * kPi / 2;
      const double rho = 0.5 / std::cos(t);
      const Complex ph = phi(op, std::polar(1.0, theta));
      total += ang.weights[q] * (a * (0.5 * rho * rho * std::log(rho) - 0.25 * rho * rho) + 0.5 * rho * rho * ph);
    }

  // Other cells: cell integral minus the node value. Cells near the origin are subdivided.
  constexpr int kReach = 48;
  const QuadratureRule gl = gauss_legendre(6, -0.5, 0.5);
  for (int jy = -kReach; jy <= kReach; ++jy)
    for (int jx = -kReach; jx <= kReach; ++jx) {
      if (jx == 0 && jy == 0) continue;
      const int sub = std::max(std::abs(jx), std::abs(jy)) <= 2 ? 4 : 1;
      Complex cell{};
      for (int sy = 0; sy < sub; ++sy)
        for (int sx = 0; sx < sub; ++sx)
          for (std::size_t u = 0; u < gl.nodes.size(); ++u)
            for (std::size_t v = 0; v < gl.nodes.size(); ++v) {
              const Point y(jx - 0.5 + (sx + 0.5 + gl.nodes[u]) / sub, jy - 0.5 + (sy + 0.5 + gl.nodes[v]) / sub);
              cell += gl.weights[u] * gl.weights[v] * phi(op, y);
            }
      total += cell / static_cast<double>(sub * sub) - phi(op, Point(jx, jy));
    }
  // The square-truncated sums above carry the midpoint-rule flux term (1/24) * (outer flux of
  // grad Phi) = 2 pi a / 24, which a compactly supported density never sees.
  return a * std::log(h) + total - 2.0 * kPi * a / 24.0;
}

// ---------------------------------------------------------------------------
// Mollifier and partition of unity

GridFunction mollifier(double delta, double spacing) {
  if (!(delta > 0.0) || !(spacing > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "mollifier needs delta > 0 and spacing > 0");
  }
  const int m = static_cast<int>(std::floor(delta / spacing));
  const int n = 2 * m + 1;
  GridFunction k;
  k.origin = Point(-m * spacing, -m * spacing);
  k.spacing = spacing;
  k.nx = k.ny = n;
  k.values.assign(k.size(), Complex{});
  double sum = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double q = 1.0 - std::norm(k.node(ix, iy)) / (delta * delta);
      if (q <= 0.0) continue;
      const double v = 3.0 / (kPi * delta * delta) * q * q;
      k.at(ix, iy) = v;
      sum += v;
    }
  }
  const double scale = 1.0 / (sum * spacing * spacing);
  for (auto& v : k.values) v *= scale;
  return k;
}

PartitionOfUnity build_partition(const GridFunction& geometry, Point lo, Point hi, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  if (!(hi.real() > lo.real() && hi.imag() > lo.imag())) {
    throw Error(ErrorKind::BoxTooSmall, "empty bounding box");
  }
  if (hi.real() - lo.real() < 4.0 * delta || hi.imag() - lo.imag() < 4.0 * delta) {
    throw Error(ErrorKind::BoxTooSmall, "bounding box side must be >= 4 delta");
  }
  const double h = geometry.spacing;
  if (h > delta / 16.0 * (1.0 + 1e-9)) {
    throw Error(ErrorKind::ResolutionTooCoarse, "partition needs spacing <= delta/16");
  }
  const Point g_lo = geometry.node(0, 0), g_hi = geometry.extent();
  if (lo.real() - 4 * delta < g_lo.real() || lo.imag() - 4 * delta < g_lo.imag() ||
      hi.real() + 4 * delta > g_hi.real() || hi.imag() + 4 * delta > g_hi.imag()) {
    throw Error(ErrorKind::InvalidArgument, "grid must contain the box inflated by 4 delta");
  }

  PartitionOfUnity pu;
  pu.delta = delta;
  pu.geometry = geometry;
  pu.geometry.values.clear();
  pu.geometry.grad1.reset();
  pu.geometry.grad2.reset();
  pu.box_lo = lo;
  pu.box_hi = hi;

  const int j1_lo = static_cast<int>(std::floor(lo.real() / delta)) - 1;
  const int j1_hi = static_cast<int>(std::ceil(hi.real() / delta)) + 1;
  const int j2_lo = static_cast<int>(std::floor(lo.imag() / delta)) - 1;
  const int j2_hi = static_cast<int>(std::ceil(hi.imag() / delta)) + 1;
  for (int j2 = j2_lo; j2 <= j2_hi; ++j2) {
    for (int j1 = j1_lo; j1 <= j1_hi; ++j1) {
      const Point a(j1 * delta, j2 * delta);
      const double dx = std::max({lo.real() - a.real(), 0.0, a.real() - hi.real()});
      const double dy = std::max({lo.imag() - a.imag(), 0.0, a.imag() - hi.imag()});
      if (std::hypot(dx, dy) >= delta) continue;
      PartitionCell cell;
      cell.j1 = j1;
      cell.j2 = j2;
      cell.center = a;
      pu.cells.push_back(std::move(cell));
    }
  }

  // Raw bumps (1 - |x - a_j|^2/delta^2)^2 and their sum.
  const Point o = geometry.origin;
  std::vector<double> total(geometry.size(), 0.0);
  for (auto& cell : pu.cells) {
    const Point a = cell.center;
    Window& w = cell.phi;
    w.ix0 = static_cast<int>(std::ceil((a.real() - delta - o.real()) / h));
    w.iy0 = static_cast<int>(std::ceil((a.imag() - delta - o.imag()) / h));
    const int ix1 = static_cast<int>(std::floor((a.real() + delta - o.real()) / h));
    const int iy1 = static_cast<int>(std::floor((a.imag() + delta - o.imag()) / h));
    w.width = ix1 - w.ix0 + 1;
    w.height = iy1 - w.iy0 + 1;
    w.values.assign(static_cast<std::size_t>(w.width) * w.height, 0.0);
    for (int v = 0; v < w.height; ++v) {
      for (int u = 0; u < w.width; ++u) {
        const double q = 1.0 - std::norm(geometry.node(w.ix0 + u, w.iy0 + v) - a) / (delta * delta);
        if (q <= 0.0) continue;
        const double b = q * q;
        w.values[static_cast<std::size_t>(v) * w.width + u] = b;
        total[geometry.index(w.ix0 + u, w.iy0 + v)] += b;
      }
    }
  }

  // Shepard normalization, then psi_j = (phi_delta * phi_delta) * phi_j.
  const GridFunction moll = mollifier(delta, h);
  const int m = moll.nx / 2;
  const int km = 2 * m;
  const int kn = 2 * km + 1;
  std::vector<double> twice(static_cast<std::size_t>(kn) * kn, 0.0);
  for (int ay = 0; ay < moll.ny; ++ay)
    for (int ax = 0; ax < moll.nx; ++ax) {
      const double va = moll.at(ax, ay).real();
      if (va == 0.0) continue;
      for (int by = 0; by < moll.ny; ++by)
        for (int bx = 0; bx < moll.nx; ++bx) {
          const double vb = moll.at(bx, by).real();
          if (vb == 0.0) continue;
          twice[static_cast<std::size_t>(ay + by) * kn + (ax + bx)] += va * vb * h * h * h * h;
        }
    }

  std::vector<double> grad_max(pu.cells.size(), 0.0);
  parallel_for(pu.cells.size(), [&](std::size_t c) {
    PartitionCell& cell = pu.cells[c];
    Window& w = cell.phi;
    for (int v = 0; v < w.height; ++v)
      for (int u = 0; u < w.width; ++u) {
        double& val = w.values[static_cast<std::size_t>(v) * w.width + u];
        if (val != 0.0) val /= total[geometry.index(w.ix0 + u, w.iy0 + v)];
      }
    for (int v = 0; v < w.height; ++v)
      for (int u = 0; u < w.width; ++u) {
        const int ix = w.ix0 + u, iy = w.iy0 + v;
        const double gx = (w.at(ix + 1, iy) - w.at(ix - 1, iy)) / (2 * h);
        const double gy = (w.at(ix, iy + 1) - w.at(ix, iy - 1)) / (2 * h);
        grad_max[c] = std::max(grad_max[c], std::hypot(gx, gy));
      }
    Window& s = cell.psi;
    s.ix0 = w.ix0 - km;
    s.iy0 = w.iy0 - km;
    s.width = w.width + 2 * km;
    s.height = w.height + 2 * km;
    s.values.assign(static_cast<std::size_t>(s.width) * s.height, 0.0);
    for (int v = 0; v < w.height; ++v)
      for (int u = 0; u < w.width; ++u) {
        const double pv = w.values[static_cast<std::size_t>(v) * w.width + u];
        if (pv == 0.0) continue;
        for (int ky = 0; ky < kn; ++ky) {
          double* out = s.values.data() + static_cast<std::size_t>(v + ky) * s.width + u;
          const double* k = twice.data() + static_cast<std::size_t>(ky) * kn;
          for (int kx = 0; kx < kn; ++kx) out[kx] += pv * k[kx];
        }
      }
  });
  for (double g : grad_max) pu.gradient_constant = std::max(pu.gradient_constant, g * delta);
  return pu;
}

// ---------------------------------------------------------------------------
// FFT convolution with the fundamental solution

struct PotentialConvolver::Impl {
  int nx = 0, ny = 0, fx = 0, fy = 0;
  fftw_complex* kernel_hat = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (kernel_hat) fftw_free(kernel_hat);
  }

  std::size_t padded() const { return static_cast<std::size_t>(fx) * fy; }
};

PotentialConvolver::PotentialConvolver(const EllipticOperator& op, const GridFunction& geometry)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.nx = geometry.nx;
  im.ny = geometry.ny;
  im.fx = 2 * geometry.nx;
  im.fy = 2 * geometry.ny;
  const double h = geometry.spacing;
  {
    std::lock_guard lock(planner_mutex());
    im.kernel_hat = fftw_alloc_complex(im.padded());
    im.forward = fftw_plan_dft_2d(im.fy, im.fx, im.kernel_hat, im.kernel_hat, FFTW_FORWARD, FFTW_ESTIMATE);
    im.backward = fftw_plan_dft_2d(im.fy, im.fx, im.kernel_hat, im.kernel_hat, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  const Complex self = lattice_self_weight(op, h);

  for (int iy = 0; iy < im.fy; ++iy) {
    const int dy = iy < im.ny ? iy : iy - im.fy;
    for (int ix = 0; ix < im.fx; ++ix) {
      const int dx = ix < im.nx ? ix : ix - im.fx;
      Complex k{};
      if (std::abs(dx) < im.nx && std::abs(dy) < im.ny) {
        k = (dx == 0 && dy == 0) ? self : phi(op, Point(dx * h, dy * h));
      }
      k *= h * h;
      fftw_complex& slot = im.kernel_hat[static_cast<std::size_t>(iy) * im.fx + ix];
      slot[0] = k.real();
      slot[1] = k.imag();
    }
  }
  fftw_execute(im.forward);
}

PotentialConvolver::~PotentialConvolver() = default;

std::vector<Complex> PotentialConvolver::apply(std::span<const Complex> density) const {
  return apply(0, 0, impl_->nx, impl_->ny, density);
}

std::vector<Complex> PotentialConvolver::apply(int ix0, int iy0, int width, int height,
                                               std::span<const Complex> density) const {
  const Impl& im = *impl_;
  if (density.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorKind::InvalidArgument, "density window size mismatch");
  }
  struct Buffer {
    fftw_complex* data;
    explicit Buffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
    ~Buffer() { fftw_free(data); }
  } buf(im.padded());
  std::fill_n(reinterpret_cast<double*>(buf.data), 2 * im.padded(), 0.0);
  for (int v = 0; v < height; ++v) {
    const int iy = iy0 + v;
    if (iy < 0 || iy >= im.ny) continue;
    for (int u = 0; u < width; ++u) {
      const int ix = ix0 + u;
      if (ix < 0 || ix >= im.nx) continue;
      const Complex s = density[static_cast<std::size_t>(v) * width + u];
      fftw_complex& slot = buf.data[static_cast<std::size_t>(iy) * im.fx + ix];
      slot[0] = s.real();
      slot[1] = s.imag();
    }
  }
  fftw_execute_dft(im.forward, buf.data, buf.data);
  for (std::size_t k = 0; k < im.padded(); ++k) {
    const double a = buf.data[k][0], b = buf.data[k][1];
    const double c = im.kernel_hat[k][0], d = im.kernel_hat[k][1];
    buf.data[k][0] = a * c - b * d;
    buf.data[k][1] = a * d + b * c;
  }
  fftw_execute_dft(im.backward, buf.data, buf.data);
  const double norm = 1.0 / static_cast<double>(im.padded());
  std::vector<Complex> out(static_cast<std::size_t>(im.nx) * im.ny);
  for (int iy = 0; iy < im.ny; ++iy)
    for (int ix = 0; ix < im.nx; ++ix) {
      const fftw_complex& slot = buf.data[static_cast<std::size_t>(iy) * im.fx + ix];
      out[static_cast<std::size_t>(iy) * im.nx + ix] = Complex(slot[0], slot[1]) * norm;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Localization

GridFunction vitushkin_localize(const EllipticOperator& op, const GridFunction& f,
                                std::span<const Complex> phi_samples, Point center, double radius) {
  f.check();
  if (phi_samples.size() != f.size()) throw Error(ErrorKind::InvalidArgument, "phi has the wrong size");
  for (int iy = 0; iy < f.ny; ++iy)
    for (int ix = 0; ix < f.nx; ++ix) {
      if (std::abs(f.node(ix, iy) - center) >= radius && std::abs(phi_samples[f.index(ix, iy)]) > 1e-12) {
        throw Error(ErrorKind::SupportLeak, "phi does not vanish outside its support disc");
      }
    }
  const GridFunction lf = apply_L(op, f);
  std::vector<Complex> density(f.size());
  for (std::size_t k = 0; k < density.size(); ++k) density[k] = phi_samples[k] * lf.values[k];
  const PotentialConvolver conv(op, f);
  GridFunction out = zeros_like(f);
  out.values = conv.apply(density);
  return out;
}

Complex PointDistribution::total() const {
  Complex s{};
  for (Complex w : weights) s += w;
  return s;
}

PointDistribution grid_distribution(const GridFunction& density) {
  PointDistribution t;
  const double area = density.spacing * density.spacing;
  for (int iy = 0; iy < density.ny; ++iy)
    for (int ix = 0; ix < density.nx; ++ix) {
      const Complex v = density.at(ix, iy);
      if (v == 0.0) continue;
      t.points.push_back(density.node(ix, iy));
      t.weights.push_back(v * area);
    }
  return t;
}

std::vector<LocalizedPiece> localized_pieces(const EllipticOperator& op, const GridFunction& f,
                                             const PartitionOfUnity& pu, int threads) {
  f.check();
  if (f.nx != pu.geometry.nx || f.ny != pu.geometry.ny || f.spacing != pu.geometry.spacing ||
      f.origin != pu.geometry.origin) {
    throw Error(ErrorKind::InvalidArgument, "f and the partition live on different grids");
  }
  const GridFunction lf = apply_L(op, f);
  const double lf_max = max_abs(lf, lf.values);

  std::vector<double> psi_sum(f.size(), 0.0);
  for (const auto& cell : pu.cells) {
    const Window& w = cell.psi;
    for (int v = 0; v < w.height; ++v)
      for (int u = 0; u < w.width; ++u) {
        const int ix = w.ix0 + u, iy = w.iy0 + v;
        if (ix < 0 || iy < 0 || ix >= f.nx || iy >= f.ny) continue;
        psi_sum[f.index(ix, iy)] += w.values[static_cast<std::size_t>(v) * w.width + u];
      }
  }
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (std::abs(lf.values[k]) > 1e-12 * lf_max && std::abs(psi_sum[k] - 1.0) > 1e-8) {
      throw Error(ErrorKind::CoverageGap, "L f is nonzero where the smoothed partition does not sum to 1");
    }
  }

  const PotentialConvolver conv(op, f);
  const double area = f.spacing * f.spacing;
  std::vector<LocalizedPiece> pieces(pu.cells.size());
  parallel_for(
      pu.cells.size(),
      [&](std::size_t c) {
        const PartitionCell& cell = pu.cells[c];
        LocalizedPiece& piece = pieces[c];
        piece.j1 = cell.j1;
        piece.j2 = cell.j2;
        piece.center = cell.center;
        const Window& w = cell.psi;
        std::vector<Complex> density(w.values.size());
        bool any = false;
        for (int v = 0; v < w.height; ++v)
          for (int u = 0; u < w.width; ++u) {
            const int ix = w.ix0 + u, iy = w.iy0 + v;
            if (ix < 0 || iy < 0 || ix >= f.nx || iy >= f.ny) continue;
            const std::size_t k = static_cast<std::size_t>(v) * w.width + u;
            density[k] = w.values[k] * lf.values[f.index(ix, iy)];
            if (density[k] != 0.0) {
              any = true;
              piece.source.points.push_back(f.node(ix, iy));
              piece.source.weights.push_back(density[k] * area);
            }
          }
        if (!any) return;
        piece.zero = false;
        piece.values = zeros_like(f);
        piece.values.values = conv.apply(w.ix0, w.iy0, w.width, w.height, density);
      },
      threads);
  return pieces;
}

// ---------------------------------------------------------------------------
// Laurent expansions

LaurentCoeffs laurent_coeffs(const EllipticOperator& op, const PointDistribution& t, Point a, int m_max) {
  if (m_max < 1) throw Error(ErrorKind::InvalidArgument, "m_max must be >= 1");
  LaurentCoeffs c;
  c.center = a;
  c.repeated = op.repeated;
  c.c0 = t.total();
  std::vector<Complex> s1(m_max + 1), s2(m_max + 1), mixed(m_max + 1);
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    const Point w = t.points[k] - a;
    const Complex w1 = op.coord1(w), w2 = op.coord2(w);
    Complex p1 = t.weights[k], p2 = t.weights[k];
    for (int m = 1; m <= m_max; ++m) {
      mixed[m] += w1 * p2;  // w1 w2^(m-1)
      p1 *= w1;
      p2 *= w2;
      s1[m] += p1;
      s2[m] += p2;
    }
  }
  const Complex k1 = op.k1;
  for (int m = 1; m <= m_max; ++m) {
    if (op.repeated) {
      c.higher.emplace_back(-k1 * mixed[m], k1 * s2[m]);
    } else {
      c.higher.emplace_back(-k1 / static_cast<double>(m) * s1[m],
                            -k1 * static_cast<double>(op.nu) / static_cast<double>(m) * s2[m]);
    }
  }
  return c;
}

Complex potential(const EllipticOperator& op, const PointDistribution& t, Point z) {
  Complex s{};
  for (std::size_t k = 0; k < t.points.size(); ++k) s += t.weights[k] * phi(op, z - t.points[k]);
  return s;
}

Complex potential_minus_monopole(const EllipticOperator& op, const PointDistribution& t, Point a, Point z) {
  const Point zz = z - a;
  const Complex z1 = op.coord1(zz), z2 = op.coord2(zz);
  Complex s{};
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    const Point w = t.points[k] - a;
    const Complex w1 = op.coord1(w), w2 = op.coord2(w);
    Complex d;
    if (op.repeated) {
      d = (z1 * w2 - w1 * z2) / (z2 * (z2 - w2));
    } else if (std::abs(w1) < std::abs(z1) && std::abs(w2) < std::abs(z2)) {
      d = log1p_c(-w1 / z1) + static_cast<double>(op.nu) * log1p_c(-w2 / z2);
    } else {
      d = phi_unnormalized(op, zz - w) - phi_unnormalized(op, zz);
    }
    s += t.weights[k] * d;
  }
  return op.k1 * s;
}

Complex laurent_tail(const EllipticOperator& op, const LaurentCoeffs& c, Point z, int order) {
  const Point zz = z - c.center;
  const Complex z1 = op.coord1(zz), z2 = op.coord2(zz);
  Complex s{};
  const int top = std::min<int>(order, static_cast<int>(c.higher.size()));
  Complex inv1 = 1.0, inv2 = 1.0;
  for (int m = 1; m <= top; ++m) {
    inv1 /= z1;
    inv2 /= z2;
    const auto [a1, a2] = c.higher[m - 1];
    if (c.repeated) {
      s += a1 * inv2 + a2 * z1 * inv2 / z2;
    } else {
      s += a1 * inv1 + a2 * inv2;
    }
  }
  return s;
}

std::pair<Complex, Complex> laurent_tail_gradient(const EllipticOperator& op, const LaurentCoeffs& c,
                                                  Point z, int order) {
  const Point zz = z - c.center;
  const Complex z1 = op.coord1(zz), z2 = op.coord2(zz);
  Complex g1{}, g2{};
  const int top = std::min<int>(order, static_cast<int>(c.higher.size()));
  Complex inv1 = 1.0 / z1, inv2 = 1.0 / z2;  // 1/z^(m+1) after the update below
  for (int m = 1; m <= top; ++m) {
    inv1 /= z1;
    inv2 /= z2;
    const auto [a1, a2] = c.higher[m - 1];
    const double dm = m;
    if (c.repeated) {
      g1 += a2 * inv2;
      g2 += -dm * a1 * inv2 - (dm + 1.0) * a2 * z1 * inv2 / z2;
    } else {
      g1 += -dm * a1 * inv1;
      g2 += -dm * a2 * inv2;
    }
  }
  return {g1, g2};
}

Complex c0_by_parts(const EllipticOperator& op, const GridFunction& f, const Window& psi) {
  if (!f.has_gradients()) throw Error(ErrorKind::MissingGradients, "c0_by_parts needs grad1/grad2 of f");
  const double h = f.spacing;
  Complex s{};
  for (int v = 0; v < psi.height; ++v)
    for (int u = 0; u < psi.width; ++u) {
      const int ix = psi.ix0 + u, iy = psi.iy0 + v;
      if (ix < 0 || iy < 0 || ix >= f.nx || iy >= f.ny) continue;
      const double px = (8.0 * (psi.at(ix + 1, iy) - psi.at(ix - 1, iy)) - (psi.at(ix + 2, iy) - psi.at(ix - 2, iy))) / (12 * h);
      const double py = (8.0 * (psi.at(ix, iy + 1) - psi.at(ix, iy - 1)) - (psi.at(ix, iy + 2) - psi.at(ix, iy - 2))) / (12 * h);
      if (px == 0.0 && py == 0.0) continue;
      const std::size_t k = f.index(ix, iy);
      const auto [f1, f2] = characteristic_derivatives(op, (*f.grad1)[k], (*f.grad2)[k]);
      const auto [p1, p2] = characteristic_derivatives(op, px, py);
      s += f1 * (op.repeated ? p1 : p2);
    }
  return -op.c11 * s * (h * h);
}

// ---------------------------------------------------------------------------
// Far-field checks

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] > 0.0 && y[k] > 0.0) {
      lx.push_back(std::log(x[k]));
      ly.push_back(std::log(y[k]));
    }
  }
  const std::size_t n = lx.size();
  fit.samples = static_cast<int>(n);
  if (n < 3) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) mx += lx[k], my += ly[k];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) rss += std::pow(ly[k] - intercept - fit.slope * lx[k], 2);
  const double se = std::sqrt(rss / (n - 2.0) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  fit.half_width95 = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return fit;
}

namespace {

double inner_radius(const AnnulusSpec& s) {
  const double limit = s.k4 * s.support_radius;
  if (s.inner > 0.0 && s.inner <= limit) {
    throw Error(ErrorKind::AnnulusInsideSupport, "annuli must lie outside k4 * support radius");
  }
  if (!(limit > 0.0) && !(s.inner > 0.0)) throw Error(ErrorKind::InvalidArgument, "no annulus radius");
  return s.inner > 0.0 ? s.inner : limit;
}

struct Magnitudes {
  double full, mono, second;
};

Magnitudes far_magnitudes(const EllipticOperator& op, std::pair<Complex, Complex> g,
                          const LaurentCoeffs& c, Point z) {
  const auto mono = grad_phi(op, z - c.center);
  const Complex r1 = g.first - c.c0 * mono.first;
  const Complex r2 = g.second - c.c0 * mono.second;
  const auto t = laurent_tail_gradient(op, c, z, 1);
  return {pair_norm(g), pair_norm({r1, r2}), pair_norm({r1 - t.first, r2 - t.second})};
}

FarFieldReport fit_report(const std::vector<double>& radii, const std::vector<Magnitudes>& m) {
  std::vector<double> a, b, c;
  for (const auto& v : m) {
    a.push_back(v.full);
    b.push_back(v.mono);
    c.push_back(v.second);
  }
  return {fit_loglog(radii, a), fit_loglog(radii, b), fit_loglog(radii, c)};
}

}  // namespace

FarFieldReport farfield_decay_check(const EllipticOperator& op, const PointDistribution& t,
                                    const LaurentCoeffs& coeffs, const AnnulusSpec& annuli) {
  const double r0 = inner_radius(annuli);
  const int steps = annuli.octaves * annuli.radii_per_octave;
  std::vector<double> radii(steps + 1);
  std::vector<Magnitudes> worst(steps + 1, Magnitudes{0, 0, 0});
  parallel_for(static_cast<std::size_t>(steps + 1), [&](std::size_t i) {
    const double rho = r0 * std::exp2(static_cast<double>(i) / annuli.radii_per_octave);
    radii[i] = rho;
    for (int k = 0; k < annuli.angles; ++k) {
      const Point z = coeffs.center + std::polar(rho, 2.0 * kPi * (k + 0.5) / annuli.angles);
      Complex g1{}, g2{};
      for (std::size_t p = 0; p < t.points.size(); ++p) {
        const auto g = grad_phi(op, z - t.points[p]);
        g1 += t.weights[p] * g.first;
        g2 += t.weights[p] * g.second;
      }
      const Magnitudes m = far_magnitudes(op, {g1, g2}, coeffs, z);
      worst[i].full = std::max(worst[i].full, m.full);
      worst[i].mono = std::max(worst[i].mono, m.mono);
      worst[i].second = std::max(worst[i].second, m.second);
    }
  });
  return fit_report(radii, worst);
}

FarFieldReport farfield_decay_check(const EllipticOperator& op, const GridFunction& g,
                                    const LaurentCoeffs& coeffs, const AnnulusSpec& annuli) {
  const double r0 = inner_radius(annuli);
  const int steps = annuli.octaves * annuli.radii_per_octave;
  const auto [d1, d2] = central_gradient(g, g.values);
  std::vector<Magnitudes> worst(steps, Magnitudes{0, 0, 0});
  std::vector<int> hits(steps, 0);
  const int margin = g.invalid_margin + 1;
  for (int iy = margin; iy < g.ny - margin; ++iy)
    for (int ix = margin; ix < g.nx - margin; ++ix) {
      const Point z = g.node(ix, iy);
      const double rho = std::abs(z - coeffs.center);
      if (rho < r0) continue;
      const int bin = static_cast<int>(std::floor(std::log2(rho / r0) * annuli.radii_per_octave));
      if (bin >= steps) continue;
      const std::size_t k = g.index(ix, iy);
      const Magnitudes m = far_magnitudes(op, characteristic_derivatives(op, d1[k], d2[k]), coeffs, z);
      worst[bin].full = std::max(worst[bin].full, m.full);
      worst[bin].mono = std::max(worst[bin].mono, m.mono);
      worst[bin].second = std::max(worst[bin].second, m.second);
      ++hits[bin];
    }
  std::vector<double> radii;
  std::vector<Magnitudes> kept;
  for (int b = 0; b < steps; ++b) {
    if (hits[b] == 0) continue;
    radii.push_back(r0 * std::exp2((b + 0.5) / annuli.radii_per_octave));
    kept.push_back(worst[b]);
  }
  if (radii.size() < 3) throw Error(ErrorKind::InvalidArgument, "grid does not reach the annuli");
  return fit_report(radii, kept);
}

}  // namespace ecap
