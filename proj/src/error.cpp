#include "priorfill/error.hpp"

namespace priorfill {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::NonPositiveDepth: return "NonPositiveDepth";
    case Errc::DuplicateCoordinate: return "DuplicateCoordinate";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::BadSpec: return "BadSpec";
    case Errc::NotEnoughPixels: return "NotEnoughPixels";
    case Errc::EmptyPrior: return "EmptyPrior";
    case Errc::NoSamples: return "NoSamples";
    case Errc::Degenerate: return "Degenerate";
    case Errc::Empty: return "Empty";
    case Errc::BadRange: return "BadRange";
    case Errc::EmptyEvaluationSet: return "EmptyEvaluationSet";
    case Errc::NonPositiveValue: return "NonPositiveValue";
    case Errc::BadHeader: return "BadHeader";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::UnsupportedChannels: return "UnsupportedChannels";
    case Errc::BadImage: return "BadImage";
    case Errc::NonPositiveScale: return "NonPositiveScale";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

}  // namespace priorfill
