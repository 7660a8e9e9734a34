#include "ecap/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ecap/error.hpp"

namespace ecap::io {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "read failed: " + path.string());
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

namespace {

Json parse_json(const std::string& text, const fs::path& path) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Format, std::string("missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Format, std::string("bad value for \"") + key + "\": " + e.what());
  }
}

Point point_field(const Json& j, const char* key) {
  const auto v = field<std::vector<double>>(j, key);
  if (v.size() != 2) throw Error(ErrorKind::Format, std::string("\"") + key + "\" must be [x, y]");
  return {v[0], v[1]};
}

void put_field(Json& j, const char* re, const char* im, const std::vector<Complex>& v) {
  std::vector<double> a(v.size()), b(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    a[k] = v[k].real();
    b[k] = v[k].imag();
  }
  j[re] = a;
  j[im] = b;
}

std::vector<Complex> get_field(const Json& j, const char* re, const char* im, std::size_t n) {
  const auto a = field<std::vector<double>>(j, re);
  const auto b = j.contains(im) ? field<std::vector<double>>(j, im) : std::vector<double>(a.size(), 0.0);
  if (a.size() != n || b.size() != n) throw Error(ErrorKind::Format, std::string("\"") + re + "\" has the wrong length");
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = {a[k], b[k]};
  return v;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::Format, "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

Json grid_to_json(const GridFunction& f) {
  Json j;
  j["origin"] = {f.origin.real(), f.origin.imag()};
  j["spacing"] = f.spacing;
  j["nx"] = f.nx;
  j["ny"] = f.ny;
  put_field(j, "re", "im", f.values);
  if (f.has_gradients()) {
    put_field(j, "g1re", "g1im", *f.grad1);
    put_field(j, "g2re", "g2im", *f.grad2);
  }
  return j;
}

GridFunction grid_from_json(const Json& j) {
  GridFunction f;
  f.origin = point_field(j, "origin");
  f.spacing = field<double>(j, "spacing");
  f.nx = field<int>(j, "nx");
  f.ny = field<int>(j, "ny");
  if (f.nx <= 0 || f.ny <= 0) throw Error(ErrorKind::Format, "nx and ny must be positive");
  f.values = get_field(j, "re", "im", f.size());
  if (j.contains("g1re") != j.contains("g2re")) throw Error(ErrorKind::Format, "gradients need both g1 and g2");
  if (j.contains("g1re")) {
    f.grad1 = get_field(j, "g1re", "g1im", f.size());
    f.grad2 = get_field(j, "g2re", "g2im", f.size());
  }
  try {
    f.check();
  } catch (const Error& e) {
    throw Error(ErrorKind::Format, e.what());
  }
  return f;
}

GridFunction read_grid(const fs::path& path) { return grid_from_json(parse_json(read_text(path), path)); }

void write_grid(const fs::path& path, const GridFunction& f) { write_text(path, grid_to_json(f).dump() + "\n"); }

DiscreteMeasure read_points_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t no = 0;
  std::vector<Point> pts;
  std::vector<double> w;
  bool header = false;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "x,y,w") throw Error(ErrorKind::Format, "expected header \"x,y,w\"");
      header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw Error(ErrorKind::Format, "line " + std::to_string(no) + ": expected 3 fields");
    }
    const std::string_view s(line);
    pts.emplace_back(parse_double(s.substr(0, c1), no), parse_double(s.substr(c1 + 1, c2 - c1 - 1), no));
    w.push_back(parse_double(s.substr(c2 + 1), no));
  }
  if (!header) throw Error(ErrorKind::Format, "empty point file");
  try {
    return DiscreteMeasure(std::move(pts), std::move(w));
  } catch (const Error& e) {
    throw Error(ErrorKind::Format, e.what());
  }
}

void write_points_csv(const fs::path& path, const DiscreteMeasure& mu) {
  std::string s = "x,y,w\n";
  for (std::size_t k = 0; k < mu.size(); ++k) {
    s += format_double(mu.points()[k].real()) + "," + format_double(mu.points()[k].imag()) + "," +
         format_double(mu.weights()[k]) + "\n";
  }
  write_text(path, s);
}

namespace {

fs::path sidecar(const fs::path& pgm) { return fs::path(pgm.string() + ".json"); }

}  // namespace

CompactSetMask read_mask(const fs::path& pgm) {
  const std::string data = read_text(pgm);
  std::istringstream in(data);
  std::string magic;
  int nx = 0, ny = 0, maxval = 0;
  in >> magic >> nx >> ny >> maxval;
  if (!in || magic != "P5" || nx <= 0 || ny <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorKind::Format, pgm.string() + ": expected a binary 8-bit PGM (P5)");
  }
  in.get();  // single whitespace before the raster
  const std::size_t offset = static_cast<std::size_t>(in.tellg());
  if (data.size() < offset + static_cast<std::size_t>(nx) * ny) throw Error(ErrorKind::Format, "truncated PGM raster");

  const Json side = parse_json(read_text(sidecar(pgm)), sidecar(pgm));
  CompactSetMask m;
  m.origin = point_field(side, "origin");
  m.spacing = field<double>(side, "spacing");
  if (!(m.spacing > 0.0)) throw Error(ErrorKind::Format, "spacing must be positive");
  m.nx = nx;
  m.ny = ny;
  m.occupancy.assign(static_cast<std::size_t>(nx) * ny, 0);
  for (int r = 0; r < ny; ++r)
    for (int ix = 0; ix < nx; ++ix) {
      const auto v = static_cast<unsigned char>(data[offset + static_cast<std::size_t>(r) * nx + ix]);
      m.occupancy[m.index(ix, ny - 1 - r)] = 2 * v >= static_cast<unsigned>(maxval) ? 1 : 0;
    }
  if (side.contains("discs")) {
    for (const auto& d : side.at("discs")) {
      const auto v = d.get<std::vector<double>>();
      if (v.size() != 3) throw Error(ErrorKind::Format, "discs entries must be [x, y, r]");
      m.construction.push_back({Point(v[0], v[1]), v[2]});
    }
  }
  return m;
}

void write_mask(const fs::path& pgm, const CompactSetMask& m) {
  std::string s = "P5\n" + std::to_string(m.nx) + " " + std::to_string(m.ny) + "\n255\n";
  for (int r = 0; r < m.ny; ++r)
    for (int ix = 0; ix < m.nx; ++ix) s.push_back(m.in(ix, m.ny - 1 - r) ? static_cast<char>(255) : '\0');
  write_text(pgm, s);
  Json side;
  side["origin"] = {m.origin.real(), m.origin.imag()};
  side["spacing"] = m.spacing;
  if (!m.construction.empty()) {
    Json discs = Json::array();
    for (const Disc& d : m.construction) discs.push_back({d.center.real(), d.center.imag(), d.radius});
    side["discs"] = discs;
  }
  write_text(sidecar(pgm), side.dump() + "\n");
}

namespace {

// JSON has no infinity; unbounded ratios are written as the string "inf".
Json ratio_json(double v) { return std::isinf(v) ? Json("inf") : Json(v); }

}  // namespace

Json report_to_json(const CriterionReport& r, const Json& config) {
  Json j;
  j["schema"] = "ecap-report/1";
  j["config"] = config;
  j["operator"] = {complex_json(r.c11), complex_json(r.c12), complex_json(r.c22)};
  j["function"] = r.function_id;
  j["k"] = r.k;
  j["radii"] = r.radii;
  Json centers = Json::array();
  for (Point c : r.centers) centers.push_back(complex_json(c));
  j["centers"] = centers;
  Json recs = Json::array();
  for (const DiscRecord& d : r.records) {
    Json e;
    e["center"] = complex_json(d.center);
    e["radius"] = d.radius;
    e["oscillation"] = complex_json(d.oscillation);
    e["omega"] = d.omega;
    e["cap_lower"] = d.capacity.lower;
    e["cap_upper"] = d.capacity.upper;
    e["cap_clamped"] = d.capacity.clamped;
    e["ratio_lower"] = ratio_json(d.ratio_lower);
    e["ratio_upper"] = ratio_json(d.ratio_upper);
    e["infinite"] = d.infinite;
    recs.push_back(e);
  }
  j["records"] = recs;
  Json mr = Json::array();
  for (double v : r.max_ratio) mr.push_back(ratio_json(v));
  j["max_ratio_per_radius"] = mr;
  j["median_ratio"] = r.median_ratio;
  j["q90_ratio"] = r.q90_ratio;
  j["infinite_count"] = r.infinite_count;
  j["caveat"] = CriterionReport::caveat;
  return j;
}

std::string heatmap_svg(const CriterionReport& r) {
  const int cols = static_cast<int>(r.centers.size()), rows = static_cast<int>(r.radii.size());
  const int cell = 24, left = 60, top = 30;
  const int width = left + cols * cell + 20, height = top + rows * cell + 40;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& d : r.records) {
    if (d.ratio_lower > 0.0 && std::isfinite(d.ratio_lower)) {
      lo = std::min(lo, std::log10(d.ratio_lower));
      hi = std::max(hi, std::log10(d.ratio_lower));
    }
  }
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
    << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << left << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"12\">log10 |O|/(omega cap_lower); "
    << "black = infinite, white = 0</text>\n";
  for (std::size_t n = 0; n < r.records.size(); ++n) {
    const DiscRecord& d = r.records[n];
    const int ci = static_cast<int>(n / r.radii.size()), ri = static_cast<int>(n % r.radii.size());
    std::string fill = "#ffffff";
    if (std::isinf(d.ratio_lower)) {
      fill = "#000000";
    } else if (d.ratio_lower > 0.0) {
      const double t = hi > lo ? (std::log10(d.ratio_lower) - lo) / (hi - lo) : 0.5;
      char buf[8];
      std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 * t), 64, static_cast<int>(255 * (1 - t)));
      fill = buf;
    }
    s << "<rect x=\"" << left + ci * cell << "\" y=\"" << top + ri * cell << "\" width=\"" << cell << "\" height=\""
      << cell << "\" fill=\"" << fill << "\" stroke=\"#888888\" stroke-width=\"0.5\"/>\n";
  }
  for (int ri = 0; ri < rows; ++ri) {
    s << "<text x=\"4\" y=\"" << top + ri * cell + 16 << "\" font-family=\"sans-serif\" font-size=\"10\">r="
      << format_double(r.radii[ri]) << "</text>\n";
  }
  s << "<text x=\"" << left << "\" y=\"" << top + rows * cell + 20
    << "\" font-family=\"sans-serif\" font-size=\"10\">center index</text>\n</svg>\n";
  return s.str();
}

std::string coefficients_csv(const std::vector<LocalizedPiece>& pieces, const std::vector<LaurentCoeffs>& coeffs) {
  if (pieces.size() != coeffs.size()) throw Error(ErrorKind::InvalidArgument, "pieces and coefficients differ in size");
  std::string s = "j1,j2,re_c0,im_c0,re_c11,im_c11,re_c12,im_c12\n";
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto [a, b] = coeffs[k].c1();
    const Complex c0 = coeffs[k].c0;
    s += std::to_string(pieces[k].j1) + "," + std::to_string(pieces[k].j2);
    for (double v : {c0.real(), c0.imag(), a.real(), a.imag(), b.real(), b.imag()}) s += "," + format_double(v);
    s += "\n";
  }
  return s;
}

}  // namespace ecap::io
