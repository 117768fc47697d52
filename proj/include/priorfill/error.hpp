#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace priorfill {

enum class Errc {
  OutOfBounds,
  NonPositiveDepth,
  DuplicateCoordinate,
  DimensionMismatch,
  NonFinite,
  BadSpec,
  NotEnoughPixels,
  EmptyPrior,
  NoSamples,
  Degenerate,
  Empty,
  BadRange,
  EmptyEvaluationSet,
  NonPositiveValue,
  BadHeader,
  TruncatedPayload,
  UnsupportedChannels,
  BadImage,
  NonPositiveScale,
  ConfigError,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

/// Exception carrying one of the typed error kinds above. what() is
/// "<Name>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

}  // namespace priorfill
