#pragma once

#include <cstddef>
#include <vector>

#include "glyphforge/raster.hpp"

namespace glyphforge {

struct LayoutConfig {
  double row_factor = 1.5;  // row break when consecutive tops differ by more than this x median height
  double gap_factor = 1.0;  // space when a horizontal gap exceeds this x median width

  void validate() const;
};

struct Token {
  enum class Kind { Glyph, Space, Newline };
  Kind kind = Kind::Glyph;
  std::size_t index = 0;  // meaningful for Kind::Glyph only

  static Token glyph(std::size_t i) { return {Kind::Glyph, i}; }
  static Token space() { return {Kind::Space, 0}; }
  static Token newline() { return {Kind::Newline, 0}; }

  friend bool operator==(const Token&, const Token&) = default;
};

using TokenStream = std::vector<Token>;
using Row = std::vector<std::size_t>;

std::vector<Row> group_rows(const std::vector<BoundingBox>& boxes, int median_height, const LayoutConfig& cfg);
Row sort_row(const Row& row, const std::vector<BoundingBox>& boxes);
TokenStream insert_spaces(const Row& ordered, const std::vector<BoundingBox>& boxes, int median_width,
                          const LayoutConfig& cfg);
TokenStream linearize(const std::vector<BoundingBox>& boxes, int median_width, int median_height,
                      const LayoutConfig& cfg);

/// Medians come from the boxes themselves; empty input gives an empty stream.
TokenStream linearize(const std::vector<BoundingBox>& boxes, const LayoutConfig& cfg);

}  // namespace glyphforge
