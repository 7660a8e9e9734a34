#include <cmath>
#include <random>

#include "doctest.h"
#include "ecap/error.hpp"
#include "ecap/io.hpp"

using namespace ecap;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "ecap_test_io";
  fs::create_directories(p);
  return p;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("grid json round trip") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  auto f = sample({-0.3, 0.7}, 0.1 / 3, 7, 5, [&](Point) { return Complex(n(rng), n(rng)); },
                  [&](Point) { return std::pair{Complex(n(rng), n(rng)), Complex(n(rng), 1e-300)}; });
  const fs::path p = scratch() / "g.json";
  io::write_grid(p, f);
  const GridFunction g = io::read_grid(p);
  CHECK(g.origin == f.origin);
  CHECK(g.spacing == f.spacing);
  CHECK(g.nx == 7);
  CHECK(g.ny == 5);
  CHECK(g.values == f.values);
  REQUIRE(g.has_gradients());
  CHECK(*g.grad1 == *f.grad1);
  CHECK(*g.grad2 == *f.grad2);

  // Imaginary parts are optional.
  const auto j = io::Json::parse(R"({"origin":[0,0],"spacing":0.5,"nx":2,"ny":1,"re":[1,2]})");
  const GridFunction r = io::grid_from_json(j);
  CHECK(r.values[1] == Complex(2.0, 0.0));
  CHECK(!r.has_gradients());

  CHECK(kind_of([] { io::grid_from_json(io::Json::parse(R"({"origin":[0,0],"spacing":0.5,"nx":2,"ny":2,"re":[1,2]})")); }) ==
        ErrorKind::Format);
  CHECK(kind_of([] { io::grid_from_json(io::Json::parse(R"({"spacing":0.5,"nx":1,"ny":1,"re":[1]})")); }) ==
        ErrorKind::Format);
  io::write_text(scratch() / "bad.json", "{not json");
  CHECK(kind_of([] { io::read_grid(scratch() / "bad.json"); }) == ErrorKind::Format);
  CHECK(kind_of([] { io::read_grid(scratch() / "missing.json"); }) == ErrorKind::Io);
}

TEST_CASE("points csv round trip") {
  const DiscreteMeasure mu({Point(0.1, -2.5e-7), Point(1.0 / 3.0, 4.0)}, {0.7, 1e-3});
  const fs::path p = scratch() / "p.csv";
  io::write_points_csv(p, mu);
  CHECK(io::read_text(p) == "x,y,w\n0.1,-2.5e-07,0.7\n0.3333333333333333,4,0.001\n");
  const DiscreteMeasure back = io::read_points_csv(p);
  REQUIRE(back.size() == 2);
  CHECK(back.points()[1] == mu.points()[1]);
  CHECK(back.weights()[1] == mu.weights()[1]);

  io::write_text(p, "x,y\n1,2\n");
  CHECK(kind_of([&] { io::read_points_csv(p); }) == ErrorKind::Format);
  io::write_text(p, "x,y,w\n1,2\n");
  CHECK(kind_of([&] { io::read_points_csv(p); }) == ErrorKind::Format);
  io::write_text(p, "x,y,w\n1,2,abc\n");
  CHECK(kind_of([&] { io::read_points_csv(p); }) == ErrorKind::Format);
  io::write_text(p, "x,y,w\r\n0,0,1\r\n1,0,1\r\n");
  CHECK(io::read_points_csv(p).size() == 2);
}

TEST_CASE("mask round trip") {
  const CompactSetMask m = make_swiss_cheese(4, {Point(0.2, -0.1), 0.5}, 5, 0.5, 1.0 / 64);
  const fs::path p = scratch() / "m.pgm";
  io::write_mask(p, m);
  CHECK(fs::exists(fs::path(p.string() + ".json")));
  const std::string raw = io::read_text(p);
  CHECK(raw.rfind("P5\n", 0) == 0);
  const CompactSetMask back = io::read_mask(p);
  CHECK(back.occupancy == m.occupancy);
  CHECK(back.origin == m.origin);
  CHECK(back.spacing == m.spacing);
  REQUIRE(back.construction.size() == m.construction.size());
  CHECK(back.construction[3].center == m.construction[3].center);
  CHECK(back.construction[3].radius == m.construction[3].radius);

  io::write_text(p, raw.substr(0, raw.size() / 2));
  CHECK(kind_of([&] { io::read_mask(p); }) == ErrorKind::Format);
  io::write_text(p, "P2\n1 1\n255\n0\n");
  CHECK(kind_of([&] { io::read_mask(p); }) == ErrorKind::Format);
}

TEST_CASE("report, heatmap and coefficients") {
  CriterionReport r;
  r.c11 = 1.0;
  r.c22 = 1.0;
  r.function_id = "demo";
  r.radii = {0.25, 0.5};
  r.centers = {Point(0, 0)};
  r.records.resize(2);
  r.records[0].radius = 0.25;
  r.records[0].ratio_lower = std::numeric_limits<double>::infinity();
  r.records[0].infinite = true;
  r.records[1].radius = 0.5;
  r.records[1].ratio_lower = 0.5;
  r.max_ratio = {std::numeric_limits<double>::infinity(), 0.5};
  const io::Json cfg = {{"seed", 7}};
  const io::Json j = io::report_to_json(r, cfg);
  CHECK(j["schema"] == "ecap-report/1");
  CHECK(j["config"]["seed"] == 7);
  CHECK(j["records"][0]["ratio_lower"] == "inf");
  CHECK(j["records"][1]["ratio_lower"] == 0.5);
  CHECK(j["caveat"].get<std::string>().find("constants") != std::string::npos);
  CHECK(io::report_to_json(r, cfg).dump() == j.dump());

  const std::string svg = io::heatmap_svg(r);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(svg.find("#000000") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);

  LocalizedPiece p;
  p.j1 = -1;
  p.j2 = 2;
  LaurentCoeffs c;
  c.c0 = Complex(0.5, -0.25);
  c.higher = {{Complex(1, 2), Complex(3, 4)}};
  CHECK(io::coefficients_csv({p}, {c}) == "j1,j2,re_c0,im_c0,re_c11,im_c11,re_c12,im_c12\n-1,2,0.5,-0.25,1,2,3,4\n");
}
