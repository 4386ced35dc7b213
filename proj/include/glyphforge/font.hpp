#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "glyphforge/raster.hpp"

namespace glyphforge::font {

inline constexpr int kRows = 7;

/// 7-row bitmap, '#' = ink. Lowercase letters sit on row 6; x-height
/// letters occupy rows 2..6, ascenders and the i/j dot start at row 0.
struct Bitmap {
  int width = 0;
  std::array<std::string_view, kRows> rows;

  bool ink(int col, int row) const { return rows[row][col] == '#'; }
};

/// nullptr for unsupported characters. Covers a-z, 0-9 and space.
const Bitmap* find(char c);

/// Rows of the glyph that form a detached dot (i and j only), else 0.
int dot_rows(char c);

int text_width(std::string_view text, int scale = 1);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

/// One blank column between characters; unsupported characters are skipped.
/// Pixels falling outside the image are clipped.
void draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color, int scale = 1);

}  // namespace glyphforge::font
