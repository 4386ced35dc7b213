#include "glyphforge/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "glyphforge/error.hpp"

namespace glyphforge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::MissingClassDir: return "MissingClassDir";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::OneClassOnly: return "OneClassOnly";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::BoxOutsidePage: return "BoxOutsidePage";
    case ErrorCode::UnknownPage: return "UnknownPage";
    case ErrorCode::InvalidLetter: return "InvalidLetter";
    case ErrorCode::StorageError: return "StorageError";
    case ErrorCode::HashMismatch: return "HashMismatch";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnknownBox: return "UnknownBox";
    case ErrorCode::StaleVersion: return "StaleVersion";
  }
  return "Unknown";
}

BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) noexcept {
  return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
          std::max(a.y_max, b.y_max)};
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const int ix0 = std::max(a.x_min, b.x_min);
  const int iy0 = std::max(a.y_min, b.y_min);
  const int ix1 = std::min(a.x_max, b.x_max);
  const int iy1 = std::min(a.y_max, b.y_max);
  if (ix0 > ix1 || iy0 > iy1) return 0.0;
  const double inter = static_cast<double>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

Raster::Raster(int width, int height, std::uint8_t fill)
    : Raster(width, height, std::vector<std::uint8_t>(
                                static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill)) {}

Raster::Raster(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument, "raster dimensions must be >= 1");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidArgument, "pixel count does not match width*height");
  }
}

BinaryRaster::BinaryRaster(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument, "raster dimensions must be >= 1");
  }
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0);
}

std::size_t BinaryRaster::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryRaster binarize(const Raster& img, std::uint8_t threshold, bool foreground_is_light) {
  BinaryRaster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const bool light = img.at(x, y) >= threshold;
      out.set(x, y, foreground_is_light ? light : !light);
    }
  }
  return out;
}

BinaryRaster invert(const BinaryRaster& img) {
  BinaryRaster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) out.set(x, y, !img.at(x, y));
  }
  return out;
}

std::vector<Component> connected_components(const BinaryRaster& img) {
  const int w = img.width();
  const int h = img.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<Component> comps;
  std::vector<std::pair<int, int>> stack;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img.at(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      const int id = static_cast<int>(comps.size());
      Component c{{x, y, x, y}, 0};
      stack.clear();
      stack.emplace_back(x, y);
      label[static_cast<std::size_t>(y) * w + x] = id;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++c.pixel_count;
        c.box = union_box(c.box, {cx, cy, cx, cy});
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            auto& l = label[static_cast<std::size_t>(ny) * w + nx];
            if (l >= 0 || !img.at(nx, ny)) continue;
            l = id;
            stack.emplace_back(nx, ny);
          }
        }
      }
      comps.push_back(c);
    }
  }
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    if (a.box.y_min != b.box.y_min) return a.box.y_min < b.box.y_min;
    return a.box.x_min < b.box.x_min;
  });
  return comps;
}

BinaryRaster crop(const BinaryRaster& img, const BoundingBox& box) {
  if (!img.contains(box)) {
    throw Error(ErrorCode::OutOfBounds, "crop box outside raster");
  }
  BinaryRaster out(box.width(), box.height());
  for (int y = 0; y < box.height(); ++y) {
    for (int x = 0; x < box.width(); ++x) out.set(x, y, img.at(box.x_min + x, box.y_min + y));
  }
  return out;
}

BoundingBox ink_extent(const BinaryRaster& img, const BoundingBox& region) {
  if (!img.contains(region)) {
    throw Error(ErrorCode::OutOfBounds, "region outside raster");
  }
  BoundingBox b{region.x_max + 1, region.y_max + 1, region.x_min - 1, region.y_min - 1};
  for (int y = region.y_min; y <= region.y_max; ++y) {
    for (int x = region.x_min; x <= region.x_max; ++x) {
      if (!img.at(x, y)) continue;
      b.x_min = std::min(b.x_min, x);
      b.y_min = std::min(b.y_min, y);
      b.x_max = std::max(b.x_max, x);
      b.y_max = std::max(b.y_max, y);
    }
  }
  if (!b.valid()) throw Error(ErrorCode::EmptyRegion, "no foreground pixel in region");
  return b;
}

BoundingBox ink_extent(const BinaryRaster& img) { return ink_extent(img, img.full_box()); }

Trimmed trim_whitespace(const BinaryRaster& img) {
  const BoundingBox box = ink_extent(img);
  return {crop(img, box), box};
}

namespace {

// Corner-aligned source coordinate for destination index i.
double source_coord(int i, int src, int dst) {
  if (dst == 1) return (src - 1) / 2.0;
  return static_cast<double>(i) * (src - 1) / (dst - 1);
}

}  // namespace

std::vector<double> resize_bilinear(std::span<const double> src, int src_w, int src_h, int dst_w, int dst_h) {
  if (dst_w < 1 || dst_h < 1) throw Error(ErrorCode::InvalidArgument, "resize target must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(dst_w) * dst_h);
  for (int y = 0; y < dst_h; ++y) {
    const double sy = source_coord(y, src_h, dst_h);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double fy = sy - y0;
    for (int x = 0; x < dst_w; ++x) {
      const double sx = source_coord(x, src_w, dst_w);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double fx = sx - x0;
      auto px = [&](int xx, int yy) { return src[static_cast<std::size_t>(yy) * src_w + xx]; };
      const double top = px(x0, y0) * (1.0 - fx) + px(x1, y0) * fx;
      const double bottom = px(x0, y1) * (1.0 - fx) + px(x1, y1) * fx;
      out[static_cast<std::size_t>(y) * dst_w + x] = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

Raster resize(const Raster& img, int width, int height) {
  if (width == img.width() && height == img.height()) return img;
  std::vector<double> plane(img.pixels().begin(), img.pixels().end());
  const auto scaled = resize_bilinear(plane, img.width(), img.height(), width, height);
  std::vector<std::uint8_t> px(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(scaled[i]), 0L, 255L));
  }
  return Raster(width, height, std::move(px));
}

Raster to_raster(const BinaryRaster& img, std::uint8_t ink, std::uint8_t background) {
  Raster out(img.width(), img.height(), background);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img.at(x, y)) out.set(x, y, ink);
    }
  }
  return out;
}

}  // namespace glyphforge
