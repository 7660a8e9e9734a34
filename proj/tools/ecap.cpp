// ecap: command-line front end. Every subcommand prints one JSON line on stdout.
// Exit codes: 0 success, 1 domain error, 2 usage, I/O or format error.

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <sstream>

#include "ecap/approx.hpp"
#include "ecap/complex_literal.hpp"
#include "ecap/elliptic.hpp"
#include "ecap/error.hpp"
#include "ecap/io.hpp"
#include "ecap/localization.hpp"
#include "ecap/menger.hpp"
#include "ecap/oscillation.hpp"
#include "ecap/parallel.hpp"

using namespace ecap;
using io::Json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

EllipticOperator parse_operator(const std::string& spec) {
  const auto parts = split(spec, ',');
  if (parts.size() != 3) throw Error(ErrorKind::Format, "--op expects \"c11,c12,c22\"");
  return new_operator(parse_complex(parts[0]), parse_complex(parts[1]), parse_complex(parts[2]));
}

std::vector<Complex> parse_complex_list(const std::string& s, char sep) {
  std::vector<Complex> out;
  for (const auto& item : split(s, sep)) out.push_back(parse_complex(item));
  return out;
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& z : parse_complex_list(s, ',')) {
    if (z.imag() != 0.0) throw Error(ErrorKind::Format, "expected real numbers in '" + s + "'");
    out.push_back(z.real());
  }
  return out;
}

std::vector<Point> parse_centers(const std::vector<std::string>& items) {
  std::vector<Point> out;
  for (const auto& s : items) out.push_back(parse_complex(s));
  return out;
}

Json cjson(Complex z) { return format_complex(z); }

void emit(Json j) { std::cout << j.dump() << std::endl; }

struct Options {
  std::string op = "1,0,1";
  int threads = 0;
  std::string in, f, mask, out, svg;
  std::vector<std::string> at, centers;
  std::string center = "0", radii, box;
  double radius = 0.0, delta = 0.125, k = 1.0, omega_scale = 1.0, scale = 0.5, spacing = 1.0 / 128.0;
  int boundary = 256, radial = 64, center_grid = 3, holes = 0;
  std::uint64_t seed = 0;
};

Json base_config(const std::string& cmd, const Options& o) {
  return {{"command", cmd}, {"op", o.op}, {"threads", default_threads()}};
}

int cmd_roots(const Options& o) {
  const auto op = parse_operator(o.op);
  Json j = base_config("roots", o);
  j["lambda1"] = cjson(op.lambda1);
  j["lambda2"] = cjson(op.lambda2);
  j["repeated"] = op.repeated;
  j["nu"] = op.nu;
  j["k1"] = cjson(op.k1);
  j["z1"] = {{"alpha", cjson(op.coord1.alpha)}, {"beta", cjson(op.coord1.beta)}};
  j["z2"] = {{"alpha", cjson(op.coord2.alpha)}, {"beta", cjson(op.coord2.beta)}};
  emit(j);
  return 0;
}

int cmd_phi(const Options& o) {
  const auto op = parse_operator(o.op);
  if (o.at.empty()) throw Error(ErrorKind::InvalidArgument, "phi needs at least one --at point");
  Json values = Json::array();
  for (const auto& s : o.at) {
    const Point z = parse_complex(s);
    const auto [g1, g2] = grad_phi(op, z);
    values.push_back({{"z", cjson(z)}, {"phi", cjson(phi(op, z))}, {"d1", cjson(g1)}, {"d2", cjson(g2)}});
  }
  Json j = base_config("phi", o);
  j["k1"] = cjson(op.k1);
  j["values"] = values;
  emit(j);
  return 0;
}

int cmd_osc(const Options& o) {
  const auto op = parse_operator(o.op);
  const GridFunction f = io::read_grid(o.f);
  const Disc b{parse_complex(o.center), o.radius};
  OscillationOptions opt;
  opt.n_boundary = o.boundary;
  opt.n_radial = o.radial;
  const Complex value = l_oscillation(op, f, b, opt);
  const Complex via_psi = oscillation_via_psi(op, f, b);
  Json j = base_config("osc", o);
  j["f"] = o.f;
  j["center"] = cjson(b.center);
  j["radius"] = b.radius;
  j["n_boundary"] = o.boundary;
  j["n_radial"] = o.radial;
  j["oscillation"] = cjson(value);
  j["via_psi"] = cjson(via_psi);
  emit(j);
  return 0;
}

int cmd_curv(const Options& o) {
  const DiscreteMeasure mu = io::read_points_csv(o.in);
  const double e = curvature_energy(mu, o.threads);
  Json j = base_config("curv", o);
  j.erase("op");
  j["in"] = o.in;
  j["points"] = mu.size();
  j["energy"] = e;
  emit(j);
  return 0;
}

int cmd_cap(const Options& o) {
  const DiscreteMeasure mu = io::read_points_csv(o.in);
  const CapacityEstimate c = capacity_estimate(mu, o.threads);
  Json j = base_config("cap", o);
  j.erase("op");
  j["in"] = o.in;
  j["points"] = mu.size();
  j["value"] = c.value;
  j["scale"] = c.scale;
  j["growth"] = std::isinf(c.growth) ? Json("inf") : Json(c.growth);
  j["energy"] = c.energy;
  j["mass"] = c.mass;
  j["caveat"] = CapacityEstimate::caveat;
  emit(j);
  return 0;
}

// Bounding box of the support of L f, inflated by 2 delta and grown to side >= 4 delta.
std::pair<Point, Point> default_box(const EllipticOperator& op, const GridFunction& f, double delta) {
  const GridFunction lf = apply_L(op, f);
  const double m = max_abs(lf, lf.values);
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (int iy = lf.invalid_margin; iy < f.ny - lf.invalid_margin; ++iy)
    for (int ix = lf.invalid_margin; ix < f.nx - lf.invalid_margin; ++ix) {
      if (!(std::abs(lf.at(ix, iy)) > 1e-12 * m)) continue;
      const Point x = f.node(ix, iy);
      x0 = std::min(x0, x.real());
      x1 = std::max(x1, x.real());
      y0 = std::min(y0, x.imag());
      y1 = std::max(y1, x.imag());
    }
  if (!(x1 >= x0)) throw Error(ErrorKind::InvalidArgument, "L f vanishes on the grid; nothing to localize");
  const double pad = 2.0 * delta + f.spacing;
  Point lo(x0 - pad, y0 - pad), hi(x1 + pad, y1 + pad);
  const double gx = std::max(0.0, 4.0 * delta - (hi.real() - lo.real())) / 2;
  const double gy = std::max(0.0, 4.0 * delta - (hi.imag() - lo.imag())) / 2;
  return {lo - Point(gx, gy), hi + Point(gx, gy)};
}

int cmd_localize(const Options& o) {
  const auto op = parse_operator(o.op);
  const GridFunction f = io::read_grid(o.f);
  Point lo, hi;
  if (o.box.empty()) {
    std::tie(lo, hi) = default_box(op, f, o.delta);
  } else {
    const auto b = parse_real_list(o.box);
    if (b.size() != 4) throw Error(ErrorKind::Format, "--box expects \"x0,y0,x1,y1\"");
    lo = {b[0], b[1]};
    hi = {b[2], b[3]};
  }
  const PartitionOfUnity pu = build_partition(f, lo, hi, o.delta);
  const auto pieces = localized_pieces(op, f, pu, o.threads);

  io::fs::create_directories(o.out);
  std::vector<LocalizedPiece> kept;
  std::vector<LaurentCoeffs> coeffs;
  std::vector<Complex> sum(f.size());
  for (std::size_t n = 0; n < pieces.size(); ++n) {
    const LocalizedPiece& p = pieces[n];
    if (p.zero) continue;
    const LaurentCoeffs c = laurent_coeffs(op, p.source, p.center, 2);
    Json cell;
    cell["j1"] = p.j1;
    cell["j2"] = p.j2;
    cell["center"] = cjson(p.center);
    cell["c0"] = cjson(c.c0);
    cell["c1"] = {cjson(c.c1().first), cjson(c.c1().second)};
    if (f.has_gradients()) cell["c0_by_parts"] = cjson(c0_by_parts(op, f, pu.cells[n].psi));
    cell["grid"] = io::grid_to_json(p.values);
    io::write_text(io::fs::path(o.out) / ("cell_" + std::to_string(p.j1) + "_" + std::to_string(p.j2) + ".json"),
                   cell.dump() + "\n");
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += p.values.values[k];
    kept.push_back(p);
    coeffs.push_back(c);
  }
  io::write_text(io::fs::path(o.out) / "coefficients.csv", io::coefficients_csv(kept, coeffs));

  double err = 0.0, norm = 0.0;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    err += std::abs(sum[k] - f.values[k]);
    norm += std::abs(f.values[k]);
  }
  Json j = base_config("localize", o);
  j["f"] = o.f;
  j["delta"] = o.delta;
  j["box"] = {lo.real(), lo.imag(), hi.real(), hi.imag()};
  j["out"] = o.out;
  j["cells"] = pieces.size();
  j["nonzero_pieces"] = kept.size();
  j["gradient_constant"] = pu.gradient_constant;
  j["reconstruction_l1_relative"] = norm > 0 ? err / norm : 0.0;
  emit(j);
  return 0;
}

std::vector<Point> lattice_centers(const CompactSetMask& x, const GridFunction& f, int n, double reach) {
  int x0 = x.nx, y0 = x.ny, x1 = -1, y1 = -1;
  for (int iy = 0; iy < x.ny; ++iy)
    for (int ix = 0; ix < x.nx; ++ix)
      if (x.in(ix, iy)) x0 = std::min(x0, ix), x1 = std::max(x1, ix), y0 = std::min(y0, iy), y1 = std::max(y1, iy);
  std::vector<Point> out;
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      const int ix = n == 1 ? (x0 + x1) / 2 : x0 + (x1 - x0) * (a + 1) / (n + 1);
      const int iy = n == 1 ? (y0 + y1) / 2 : y0 + (y1 - y0) * (b + 1) / (n + 1);
      const Point c = x.node(ix, iy);
      const Point lo = x.node(2, 2), hi = x.node(x.nx - 3, x.ny - 3);
      const bool fits_mask = c.real() - reach >= lo.real() && c.imag() - reach >= lo.imag() &&
                             c.real() + reach <= hi.real() && c.imag() + reach <= hi.imag();
      if (x.in(ix, iy) && fits_mask && f.contains_disc(c, reach, 2)) out.push_back(c);
    }
  return out;
}

int cmd_scan(const Options& o) {
  const auto op = parse_operator(o.op);
  const GridFunction f = io::read_grid(o.f);
  const CompactSetMask x = io::read_mask(o.mask);
  const std::vector<double> radii = parse_real_list(o.radii);
  if (radii.empty()) throw Error(ErrorKind::InvalidArgument, "--radii is empty");
  const double r_max = *std::max_element(radii.begin(), radii.end());
  const std::vector<Point> centers = o.centers.empty()
                                         ? lattice_centers(x, f, o.center_grid, std::max(1.05, o.k) * r_max)
                                         : parse_centers(o.centers);
  if (centers.empty()) throw Error(ErrorKind::InvalidArgument, "no admissible scan centers");
  ScanOptions so;
  so.k = o.k;
  so.omega_scale = o.omega_scale;
  so.function_id = io::fs::path(o.f).filename().string();
  so.threads = o.threads;
  const CriterionReport rep = criterion_scan(op, f, x, radii, centers, so);

  Json config = base_config("scan", o);
  config["f"] = o.f;
  config["mask"] = o.mask;
  config["radii"] = radii;
  config["k"] = o.k;
  config["omega_scale"] = o.omega_scale;
  config["center_grid"] = o.centers.empty() ? Json(o.center_grid) : Json(nullptr);
  config.erase("threads");  // reports are thread-count independent
  if (!o.out.empty()) io::write_text(o.out, io::report_to_json(rep, config).dump(2) + "\n");
  if (!o.svg.empty()) io::write_text(o.svg, io::heatmap_svg(rep));

  Json j = config;
  j["out"] = o.out;
  j["records"] = rep.records.size();
  j["infinite_count"] = rep.infinite_count;
  Json mr = Json::array();
  for (double v : rep.max_ratio) mr.push_back(std::isinf(v) ? Json("inf") : Json(v));
  j["max_ratio_per_radius"] = mr;
  j["median_ratio"] = rep.median_ratio;
  emit(j);
  return 0;
}

int cmd_cheese(const Options& o) {
  const Disc outer{parse_complex(o.center), o.radius > 0 ? o.radius : 1.0};
  const CompactSetMask m = make_swiss_cheese(o.seed, outer, o.holes, o.scale, o.spacing);
  io::write_mask(o.out, m);
  Json j = base_config("cheese", o);
  j.erase("op");
  j.erase("threads");
  j["seed"] = o.seed;
  j["holes"] = o.holes;
  j["scale"] = o.scale;
  j["center"] = cjson(outer.center);
  j["radius"] = outer.radius;
  j["spacing"] = o.spacing;
  j["out"] = o.out;
  j["nx"] = m.nx;
  j["ny"] = m.ny;
  j["occupied"] = m.count();
  emit(j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ecap: fundamental solutions, oscillations, capacities and localization for planar elliptic operators"};
  app.require_subcommand(1);
  app.fallthrough();  // --threads is accepted after the subcommand too
  Options o;
  app.add_option("--threads", o.threads, "worker threads (overrides ECAP_THREADS)")->check(CLI::PositiveNumber);

  auto* roots = app.add_subcommand("roots", "characteristic roots, canonical coordinates and k1");
  roots->add_option("--op", o.op, "\"c11,c12,c22\" complex literals")->required();

  auto* phi_cmd = app.add_subcommand("phi", "fundamental solution and its characteristic gradient");
  phi_cmd->add_option("--op", o.op)->required();
  phi_cmd->add_option("--at", o.at, "evaluation point, repeatable")->required();

  auto* osc = app.add_subcommand("osc", "L-oscillation on a disc");
  osc->add_option("--op", o.op)->required();
  osc->add_option("--f", o.f, "GridFunction JSON")->required()->check(CLI::ExistingFile);
  osc->add_option("--center", o.center)->required();
  osc->add_option("--radius", o.radius)->required();
  osc->add_option("--boundary", o.boundary, "boundary nodes");
  osc->add_option("--radial", o.radial, "radial nodes");

  auto* curv = app.add_subcommand("curv", "Menger curvature energy of a point measure");
  curv->add_option("--in", o.in, "points CSV")->required()->check(CLI::ExistingFile);

  auto* cap = app.add_subcommand("cap", "capacity lower bound of a point measure");
  cap->add_option("--in", o.in, "points CSV")->required()->check(CLI::ExistingFile);

  auto* loc = app.add_subcommand("localize", "partition-of-unity localization with Laurent coefficients");
  loc->add_option("--op", o.op)->required();
  loc->add_option("--f", o.f)->required()->check(CLI::ExistingFile);
  loc->add_option("--delta", o.delta);
  loc->add_option("--box", o.box, "\"x0,y0,x1,y1\"; default: support of L f inflated by 2 delta");
  loc->add_option("--out", o.out, "output directory")->required();

  auto* scan = app.add_subcommand("scan", "criterion scan over discs");
  scan->add_option("--op", o.op)->required();
  scan->add_option("--f", o.f)->required()->check(CLI::ExistingFile);
  scan->add_option("--mask", o.mask, "PGM mask with JSON sidecar")->required()->check(CLI::ExistingFile);
  scan->add_option("--radii", o.radii, "comma separated")->required();
  scan->add_option("--centers", o.centers, "disc centers as complex literals");
  scan->add_option("--center-grid", o.center_grid, "n x n lattice over the set when --centers is absent");
  scan->add_option("--k", o.k);
  scan->add_option("--A", o.omega_scale, "omega(r) = A * modulus of continuity of grad f");
  scan->add_option("--out", o.out, "report JSON");
  scan->add_option("--svg", o.svg, "heatmap SVG");

  auto* cheese = app.add_subcommand("cheese", "Swiss cheese mask generator");
  cheese->add_option("--seed", o.seed)->required();
  cheese->add_option("--holes", o.holes)->required();
  cheese->add_option("--scale", o.scale, "hole scale in (0,1)");
  cheese->add_option("--center", o.center);
  cheese->add_option("--radius", o.radius);
  cheese->add_option("--spacing", o.spacing);
  cheese->add_option("--out", o.out, "PGM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (o.threads > 0) set_default_threads(o.threads);

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "roots") return cmd_roots(o);
    if (name == "phi") return cmd_phi(o);
    if (name == "osc") return cmd_osc(o);
    if (name == "curv") return cmd_curv(o);
    if (name == "cap") return cmd_cap(o);
    if (name == "localize") return cmd_localize(o);
    if (name == "scan") return cmd_scan(o);
    if (name == "cheese") return cmd_cheese(o);
  } catch (const Error& e) {
    std::cerr << Json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << std::endl;
    return e.is_io() ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << Json{{"error", "Io"}, {"message", e.what()}}.dump() << std::endl;
    return 2;
  }
  return 2;
}
