#pragma once

#include <string>
#include <utility>
#include <vector>

#include "glyphforge/raster.hpp"

namespace glyphforge {

/// Tunables for character segmentation. Every factor is relative to the
/// page's median box width or height.
struct SegmenterConfig {
  double split_factor = 1.5;       // boxes wider than this x median width are cut
  double dot_height_factor = 0.5;  // dot candidate: height < factor x median height
  double dot_width_factor = 0.5;   // ... and width < factor x median width
  double dot_search_slack = 0.5;   // horizontal widening of the dot, x median width
  double dot_max_gap = 1.0;        // stem top may sit at most this x median height below the dot
  int min_component_pixels = 3;
  int glyph_size = 40;

  void validate() const;
};

/// A normalized character crop: glyph_size x glyph_size, ink set.
struct Glyph {
  BinaryRaster image;
  BoundingBox source_box;
  std::string page_id;

  friend bool operator==(const Glyph&, const Glyph&) = default;
};

struct MedianDims {
  int width = 0;
  int height = 0;
};

/// Median width and height; even-sized inputs average the middle pair,
/// rounding half up. Throws EmptyInput.
MedianDims median_dims(const std::vector<BoundingBox>& boxes);

/// Component boxes that survive the noise filter. Small components are kept
/// only when they would pair up as a dot with a stem below them.
std::vector<BoundingBox> extract_boxes(const BinaryRaster& page, const SegmenterConfig& cfg);

std::vector<BoundingBox> split_wide_boxes(const BinaryRaster& page, const std::vector<BoundingBox>& boxes,
                                          int median_width, const SegmenterConfig& cfg);

/// Column ranges [first, last] of the n equal slices a box is cut into.
std::vector<std::pair<int, int>> slice_columns(const BoundingBox& box, int n);

std::vector<BoundingBox> merge_dotted(const BinaryRaster& page, const std::vector<BoundingBox>& boxes,
                                      int median_width, int median_height, const SegmenterConfig& cfg);

Glyph normalize_glyph(const BinaryRaster& page, const BoundingBox& box, const SegmenterConfig& cfg,
                      std::string page_id = {});

struct Segment {
  BoundingBox box;
  Glyph glyph;
};

/// extract -> medians -> dot merge -> wide-box split -> normalize.
std::vector<Segment> segment_page(const BinaryRaster& page, const SegmenterConfig& cfg,
                                  const std::string& page_id = {});

/// Only the boxes of segment_page(), without glyph normalization.
std::vector<BoundingBox> segment_boxes(const BinaryRaster& page, const SegmenterConfig& cfg);

void sort_reading_boxes(std::vector<BoundingBox>& boxes);

}  // namespace glyphforge
