#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ecap/approx.hpp"
#include "ecap/grid.hpp"
#include "ecap/localization.hpp"
#include "ecap/menger.hpp"
#include "json.hpp"

namespace ecap::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Whole-file read/write. Throw Error(Io).
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

/// {"origin":[x,y], "spacing":h, "nx", "ny", "re", "im", optional "g1re"/"g1im"/"g2re"/"g2im"},
/// row-major with iy outer. Malformed documents throw Error(Format).
Json grid_to_json(const GridFunction& f);
GridFunction grid_from_json(const Json& j);
GridFunction read_grid(const fs::path& path);
void write_grid(const fs::path& path, const GridFunction& f);

/// Point-measure CSV with header "x,y,w".
DiscreteMeasure read_points_csv(const fs::path& path);
void write_points_csv(const fs::path& path, const DiscreteMeasure& mu);

/// Binary PGM (P5, maxval 255, first row = top of the raster, occupied = 255) plus a JSON
/// sidecar `<path>.json` holding {"origin":[x,y], "spacing":h} and, for cheese sets, "discs".
CompactSetMask read_mask(const fs::path& pgm);
void write_mask(const fs::path& pgm, const CompactSetMask& mask);

/// Report document with "schema": "ecap-report/1"; `config` is embedded verbatim.
Json report_to_json(const CriterionReport& r, const Json& config);

/// Standalone SVG 1.1 heatmap of ratio_lower over (center index, radius index).
std::string heatmap_svg(const CriterionReport& r);

/// "j1,j2,re_c0,im_c0,re_c11,im_c11,re_c12,im_c12".
std::string coefficients_csv(const std::vector<LocalizedPiece>& pieces,
                             const std::vector<LaurentCoeffs>& coeffs);

/// Shortest round-trip decimal form.
std::string format_double(double v);
Json complex_json(Complex z);

}  // namespace ecap::io
