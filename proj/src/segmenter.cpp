#include "glyphforge/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "glyphforge/error.hpp"

namespace glyphforge {

void SegmenterConfig::validate() const {
  if (!(split_factor > 0 && dot_height_factor > 0 && dot_width_factor > 0 && dot_search_slack > 0 &&
        dot_max_gap > 0)) {
    throw Error(ErrorCode::InvalidArgument, "segmenter factors must be > 0");
  }
  if (min_component_pixels < 1) throw Error(ErrorCode::InvalidArgument, "min_component_pixels must be >= 1");
  if (glyph_size < 8) throw Error(ErrorCode::InvalidArgument, "glyph_size must be >= 8");
}

void sort_reading_boxes(std::vector<BoundingBox>& boxes) {
  std::stable_sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
    if (a.y_min != b.y_min) return a.y_min < b.y_min;
    return a.x_min < b.x_min;
  });
}

namespace {

int median_of(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2] + 1) / 2;
}

bool is_dot(const BoundingBox& b, int median_width, int median_height, const SegmenterConfig& cfg) {
  return b.height() < cfg.dot_height_factor * median_height && b.width() < cfg.dot_width_factor * median_width;
}

bool is_stem_candidate(const BoundingBox& dot, const BoundingBox& s, int median_width, int median_height,
                       const SegmenterConfig& cfg) {
  if (s.y_min <= dot.y_max) return false;
  if (s.y_min - dot.y_max > cfg.dot_max_gap * median_height) return false;
  const double slack = cfg.dot_search_slack * median_width;
  return s.x_max >= dot.x_min - slack && s.x_min <= dot.x_max + slack;
}

double center_x(const BoundingBox& b) { return (b.x_min + b.x_max) / 2.0; }

// Index of the preferred stem among `stems` for `dot`, skipping used ones.
std::optional<std::size_t> pick_stem(const BoundingBox& dot, const std::vector<BoundingBox>& stems,
                                     const std::vector<bool>& used, int median_width, int median_height,
                                     const SegmenterConfig& cfg) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < stems.size(); ++i) {
    if (used[i] || !is_stem_candidate(dot, stems[i], median_width, median_height, cfg)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& s = stems[i];
    const auto& b = stems[*best];
    const double ds = std::abs(center_x(s) - center_x(dot));
    const double db = std::abs(center_x(b) - center_x(dot));
    if (s.width() != b.width()) {
      if (s.width() < b.width()) best = i;
    } else if (ds != db) {
      if (ds < db) best = i;
    } else if (s.y_min < b.y_min) {
      best = i;
    }
  }
  return best;
}

}  // namespace

MedianDims median_dims(const std::vector<BoundingBox>& boxes) {
  if (boxes.empty()) throw Error(ErrorCode::EmptyInput, "median of no boxes");
  std::vector<int> w;
  std::vector<int> h;
  w.reserve(boxes.size());
  h.reserve(boxes.size());
  for (const auto& b : boxes) {
    w.push_back(b.width());
    h.push_back(b.height());
  }
  return {median_of(std::move(w)), median_of(std::move(h))};
}

std::vector<BoundingBox> extract_boxes(const BinaryRaster& page, const SegmenterConfig& cfg) {
  cfg.validate();
  std::vector<BoundingBox> kept;
  std::vector<BoundingBox> small;
  for (const auto& c : connected_components(page)) {
    if (static_cast<int>(c.pixel_count) >= cfg.min_component_pixels) {
      kept.push_back(c.box);
    } else {
      small.push_back(c.box);
    }
  }
  if (kept.empty() || small.empty()) return kept;

  const auto med = median_dims(kept);
  std::vector<BoundingBox> stems;
  for (const auto& b : kept) {
    if (!is_dot(b, med.width, med.height, cfg)) stems.push_back(b);
  }
  for (const auto& s : small) {
    if (!is_dot(s, med.width, med.height, cfg)) continue;
    const bool has_stem = std::any_of(stems.begin(), stems.end(), [&](const BoundingBox& stem) {
      return is_stem_candidate(s, stem, med.width, med.height, cfg);
    });
    if (has_stem) kept.push_back(s);
  }
  sort_reading_boxes(kept);
  return kept;
}

std::vector<std::pair<int, int>> slice_columns(const BoundingBox& box, int n) {
  std::vector<std::pair<int, int>> cols;
  const long w = box.width();
  for (int i = 0; i < n; ++i) {
    const int first = box.x_min + static_cast<int>(i * w / n);
    const int last = box.x_min + static_cast<int>((i + 1) * w / n) - 1;
    if (first <= last) cols.emplace_back(first, last);
  }
  return cols;
}

std::vector<BoundingBox> split_wide_boxes(const BinaryRaster& page, const std::vector<BoundingBox>& boxes,
                                          int median_width, const SegmenterConfig& cfg) {
  if (median_width < 1) throw Error(ErrorCode::InvalidArgument, "median width must be >= 1");
  std::vector<BoundingBox> out;
  for (const auto& b : boxes) {
    if (b.width() <= cfg.split_factor * median_width) {
      out.push_back(b);
      continue;
    }
    const int n = std::max(2, static_cast<int>(std::lround(static_cast<double>(b.width()) / median_width)));
    for (auto [first, last] : slice_columns(b, n)) {
      try {
        out.push_back(ink_extent(page, {first, b.y_min, last, b.y_max}));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyRegion) throw;
      }
    }
  }
  sort_reading_boxes(out);
  return out;
}

std::vector<BoundingBox> merge_dotted(const BinaryRaster& page, const std::vector<BoundingBox>& boxes,
                                      int median_width, int median_height, const SegmenterConfig& cfg) {
  if (median_width < 1 || median_height < 1) throw Error(ErrorCode::InvalidArgument, "medians must be >= 1");
  std::vector<BoundingBox> dots;
  std::vector<BoundingBox> stems;
  for (const auto& b : boxes) {
    (is_dot(b, median_width, median_height, cfg) ? dots : stems).push_back(b);
  }
  if (dots.empty()) return boxes;
  sort_reading_boxes(dots);

  std::vector<bool> used(stems.size(), false);
  for (const auto& d : dots) {
    const auto pick = pick_stem(d, stems, used, median_width, median_height, cfg);
    if (!pick) continue;  // orphan dot: noise
    used[*pick] = true;
    stems[*pick] = ink_extent(page, union_box(d, stems[*pick]));
  }
  sort_reading_boxes(stems);
  return stems;
}

Glyph normalize_glyph(const BinaryRaster& page, const BoundingBox& box, const SegmenterConfig& cfg,
                      std::string page_id) {
  const int g = cfg.glyph_size;
  const BoundingBox tight = ink_extent(page, box);
  const int tw = tight.width();
  const int th = tight.height();
  const double s = static_cast<double>(g) / std::max(tw, th);
  const int dw = std::clamp(static_cast<int>(std::lround(tw * s)), 1, g);
  const int dh = std::clamp(static_cast<int>(std::lround(th * s)), 1, g);

  std::vector<double> occupancy(static_cast<std::size_t>(tw) * th);
  for (int y = 0; y < th; ++y) {
    for (int x = 0; x < tw; ++x) {
      occupancy[static_cast<std::size_t>(y) * tw + x] = page.at(tight.x_min + x, tight.y_min + y) ? 1.0 : 0.0;
    }
  }
  const auto scaled = resize_bilinear(occupancy, tw, th, dw, dh);
  BinaryRaster content(dw, dh);
  for (int y = 0; y < dh; ++y) {
    for (int x = 0; x < dw; ++x) content.set(x, y, scaled[static_cast<std::size_t>(y) * dw + x] >= 0.5);
  }
  if (content.count() == 0) {
    // Downscaling can step over hairline strokes; splat each ink pixel instead.
    for (int y = 0; y < th; ++y) {
      for (int x = 0; x < tw; ++x) {
        if (occupancy[static_cast<std::size_t>(y) * tw + x] == 0.0) continue;
        const int cx = std::min(dw - 1, static_cast<int>(x * s));
        const int cy = std::min(dh - 1, static_cast<int>(y * s));
        content.set(cx, cy, true);
      }
    }
  }

  const auto trimmed = trim_whitespace(content);
  const int cw = trimmed.image.width();
  const int ch = trimmed.image.height();
  const int left = (g - cw) / 2;
  const int top = (g - ch) / 2;
  BinaryRaster out(g, g);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      if (trimmed.image.at(x, y)) out.set(left + x, top + y, true);
    }
  }
  return Glyph{std::move(out), box, std::move(page_id)};
}

std::vector<BoundingBox> segment_boxes(const BinaryRaster& page, const SegmenterConfig& cfg) {
  auto boxes = extract_boxes(page, cfg);
  if (boxes.empty()) return boxes;
  const auto med = median_dims(boxes);
  boxes = merge_dotted(page, boxes, med.width, med.height, cfg);
  boxes = split_wide_boxes(page, boxes, med.width, cfg);
  return boxes;
}

std::vector<Segment> segment_page(const BinaryRaster& page, const SegmenterConfig& cfg, const std::string& page_id) {
  std::vector<Segment> out;
  for (const auto& b : segment_boxes(page, cfg)) {
    out.push_back({b, normalize_glyph(page, b, cfg, page_id)});
  }
  return out;
}

}  // namespace glyphforge
