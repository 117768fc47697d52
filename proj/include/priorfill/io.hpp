#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "priorfill/core.hpp"
#include "priorfill/metrics.hpp"

namespace priorfill {

using Bytes = std::vector<std::uint8_t>;

// PFM: "Pf\n<W> <H>\n<scale>\n" then W*H float32, bottom row first. A
// negative scale means little-endian. Only single-channel files are accepted.
Grid read_pfm(std::span<const std::uint8_t> bytes);
Bytes write_pfm(const Grid& grid);

// 16-bit grayscale PNG depth. depth_m = raw * scale_mm_per_unit / 1000 and
// raw 0 marks an invalid pixel.
DepthMap read_depth_png16(std::span<const std::uint8_t> bytes, double scale_mm_per_unit);

struct Png16Encoding {
  Bytes bytes;
  /// Valid pixels whose raw value had to be clamped into [1, 65535].
  std::size_t clamped = 0;
};
Png16Encoding write_depth_png16(const DepthMap& map, double scale_mm_per_unit);

/// 8-bit grayscale PNG; values >= 128 are true.
ValidityMask read_mask_png(std::span<const std::uint8_t> bytes);
/// 8-bit grayscale PNG from a row-major byte buffer.
Bytes write_gray8_png(int width, int height, std::span<const std::uint8_t> pixels);
/// Grayscale visualization: 0 maps to 0, `max_value` and above to 255.
Bytes visualize_png(const Grid& grid, double max_value);

struct StageTimings {
  double synth = 0.0;
  double index = 0.0;
  double prefill = 0.0;
  double metrics = 0.0;
};

struct ReportDocument {
  std::string version;
  nlohmann::json config = nlohmann::json::object();
  std::vector<nlohmann::json> results;
  /// Absent timings serialize as null so reports can be compared byte for byte.
  std::optional<StageTimings> timings;
  std::uint64_t clamped_fill_count = 0;
};

nlohmann::json to_json(const MetricsReport& m);

/// Sorted keys, two-space indent, floats with 6 significant digits.
std::string canonical_dump(const nlohmann::json& value);
Bytes write_report(const ReportDocument& doc);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace priorfill
