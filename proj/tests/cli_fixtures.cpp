// Writes the input files used by the CLI test into the directory given as argv[1].
#include <cmath>
#include <filesystem>
#include <iostream>

#include "ecap/io.hpp"

using namespace ecap;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: cli_fixtures DIR\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const double h = 1.0 / 128.0;

  io::write_grid(dir / "quad.json", sample({-1, -1}, h, 257, 257, [](Point x) { return Complex(x.real() * x.real()); }));

  constexpr double r = 0.25;
  const auto bump = [](Point x) -> Complex {
    const double q = 1.0 - std::norm(x) / (r * r);
    return q > 0 ? q * q * q * q * (1.0 + x.real()) : 0.0;
  };
  const auto grad = [](Point x) -> std::pair<Complex, Complex> {
    const double q = 1.0 - std::norm(x) / (r * r);
    if (q <= 0) return {0.0, 0.0};
    const double q3 = q * q * q, p = 1.0 + x.real();
    return {-8.0 * x.real() / (r * r) * q3 * p + q3 * q, -8.0 * x.imag() / (r * r) * q3 * p};
  };
  io::write_grid(dir / "bump.json", sample({-1.125, -1.125}, h, 289, 289, bump, grad));

  std::vector<Point> line, circle;
  for (int k = 0; k < 12; ++k) line.emplace_back(0.5 * k - 1.0, 0.25 * k + 2.0);
  for (int k = 0; k < 60; ++k) circle.push_back(std::polar(1.0, 2.0 * M_PI * k / 60));
  io::write_points_csv(dir / "line.csv", DiscreteMeasure(line, std::vector<double>(line.size(), 1.0)));
  io::write_points_csv(dir / "circle.csv",
                       DiscreteMeasure(circle, std::vector<double>(circle.size(), 2.0 * M_PI / 60)));
  return 0;
}
