#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecap {

enum class ErrorKind {
  NotElliptic,
  DegenerateOperator,
  SingularPoint,
  CalibrationFailed,
  GridTooSmall,
  DiscOutsideGrid,
  QuadratureUnderresolved,
  MissingGradients,
  ZeroMeasure,
  SingularMap,
  BoxTooSmall,
  SupportLeak,
  CoverageGap,
  AnnulusInsideSupport,
  PlacementFailed,
  ResolutionTooCoarse,
  InvalidArgument,
  Io,
  Format,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Domain and I/O failures. `kind()` lets callers (the CLI) map errors to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// I/O and format errors are not domain errors.
  bool is_io() const noexcept { return kind_ == ErrorKind::Io || kind_ == ErrorKind::Format; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotElliptic: return "NotElliptic";
    case ErrorKind::DegenerateOperator: return "DegenerateOperator";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::DiscOutsideGrid: return "DiscOutsideGrid";
    case ErrorKind::QuadratureUnderresolved: return "QuadratureUnderresolved";
    case ErrorKind::MissingGradients: return "MissingGradients";
    case ErrorKind::ZeroMeasure: return "ZeroMeasure";
    case ErrorKind::SingularMap: return "SingularMap";
    case ErrorKind::BoxTooSmall: return "BoxTooSmall";
    case ErrorKind::SupportLeak: return "SupportLeak";
    case ErrorKind::CoverageGap: return "CoverageGap";
    case ErrorKind::AnnulusInsideSupport: return "AnnulusInsideSupport";
    case ErrorKind::PlacementFailed: return "PlacementFailed";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Format: return "Format";
  }
  return "Unknown";
}

}  // namespace ecap
