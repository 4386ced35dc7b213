#include "glyphforge/layout.hpp"

#include <algorithm>
#include <numeric>

#include "glyphforge/error.hpp"
#include "glyphforge/segmenter.hpp"

namespace glyphforge {

void LayoutConfig::validate() const {
  if (!(row_factor > 0 && gap_factor > 0)) throw Error(ErrorCode::InvalidArgument, "layout factors must be > 0");
}

std::vector<Row> group_rows(const std::vector<BoundingBox>& boxes, int median_height, const LayoutConfig& cfg) {
  if (median_height < 1) throw Error(ErrorCode::InvalidArgument, "median height must be >= 1");
  std::vector<Row> rows;
  if (boxes.empty()) return rows;
  Row order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].y_min < boxes[b].y_min; });
  const double threshold = cfg.row_factor * median_height;
  rows.push_back({order.front()});
  for (std::size_t k = 1; k < order.size(); ++k) {
    const int step = boxes[order[k]].y_min - boxes[order[k - 1]].y_min;
    if (step > threshold) rows.emplace_back();
    rows.back().push_back(order[k]);
  }
  return rows;
}

Row sort_row(const Row& row, const std::vector<BoundingBox>& boxes) {
  Row out = row;
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    if (boxes[a].x_min != boxes[b].x_min) return boxes[a].x_min < boxes[b].x_min;
    return boxes[a].y_min < boxes[b].y_min;
  });
  return out;
}

TokenStream insert_spaces(const Row& ordered, const std::vector<BoundingBox>& boxes, int median_width,
                          const LayoutConfig& cfg) {
  TokenStream out;
  const double threshold = cfg.gap_factor * median_width;
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    if (k > 0) {
      const int gap = boxes[ordered[k]].x_min - boxes[ordered[k - 1]].x_max - 1;
      if (gap > threshold) out.push_back(Token::space());
    }
    out.push_back(Token::glyph(ordered[k]));
  }
  return out;
}

TokenStream linearize(const std::vector<BoundingBox>& boxes, int median_width, int median_height,
                      const LayoutConfig& cfg) {
  cfg.validate();
  TokenStream out;
  for (const auto& row : group_rows(boxes, median_height, cfg)) {
    if (!out.empty()) out.push_back(Token::newline());
    const auto tokens = insert_spaces(sort_row(row, boxes), boxes, median_width, cfg);
    out.insert(out.end(), tokens.begin(), tokens.end());
  }
  return out;
}

TokenStream linearize(const std::vector<BoundingBox>& boxes, const LayoutConfig& cfg) {
  if (boxes.empty()) return {};
  const auto med = median_dims(boxes);
  return linearize(boxes, med.width, med.height, cfg);
}

}  // namespace glyphforge
