#pragma once

#include <string>
#include <string_view>

#include "ecap/types.hpp"

namespace ecap {

/// Parses "a", "a+bi", "a-bi", "bi", "i", "-i" (no whitespace, '.' decimal separator).
/// Throws Error(Format) on anything else.
Complex parse_complex(std::string_view text);

/// Shortest round-trippable "a+bi" rendering.
std::string format_complex(Complex z);

}  // namespace ecap
