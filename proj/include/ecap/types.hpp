#pragma once

#include <complex>

namespace ecap {

using Complex = std::complex<double>;

/// A point of the plane, identified with x1 + i x2.
using Point = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace ecap
