#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glyphforge/raster.hpp"

namespace glyphforge {

/// Decodes a JPEG or PNG file to luminance. Colour input is reduced with
/// 0.299R + 0.587G + 0.114B rounded to nearest; alpha is ignored.
Raster load_image(const std::filesystem::path& path);
Raster decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const Raster& img);
std::vector<std::uint8_t> encode_png(const RgbImage& img);

void write_png(const std::filesystem::path& path, const Raster& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
/// Ink is written white (255) on black (0).
void write_png(const std::filesystem::path& path, const BinaryRaster& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace glyphforge
