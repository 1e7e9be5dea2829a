#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "brt/forward_model.hpp"
#include "brt/geometry.hpp"

namespace brt {

inline constexpr std::uint16_t kImageFileVersion = 1;
inline constexpr std::uint16_t kMeasurementFileVersion = 1;

// Image file, little endian:
//   "BRTI" | u16 version | u8 kind | u32 L2 | u32 L1 | f64 Δ2 | f64 Δ1 | f64 values[L2·L1]
std::string encode_image(const Image& img);
Image decode_image(std::string_view bytes);

// Measurement file, little endian:
//   "BRTM" | u16 version | u32 L2 | u32 L1 | f64 Δ2 | f64 Δ1 | u32 pairs | f64 I0[L]
//   then per pair: u8 transmission | f64 θs.x, θs.y, θd.x, θd.y | u8 active[L]
//                  | f64 beta[L] | f64 counts[L]
std::string encode_measurements(const MeasurementSet& ms);
MeasurementSet decode_measurements(std::string_view bytes);

void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

void write_image(const std::filesystem::path& path, const Image& img);
Image read_image(const std::filesystem::path& path);
void write_measurements(const std::filesystem::path& path, const MeasurementSet& ms);
MeasurementSet read_measurements(const std::filesystem::path& path);

/// 8-bit binary graymap, linearly mapping [lo, hi] to [0, 255]; row 0 of the
/// image (lowest y) is written last so the picture is upright.
void write_pgm(const std::filesystem::path& path, const Image& img, double lo, double hi);

}  // namespace brt
