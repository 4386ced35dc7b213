#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace glyphforge {

/// Axis-aligned box with inclusive pixel coordinates.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min + 1; }
  int height() const noexcept { return y_max - y_min + 1; }
  long area() const noexcept { return static_cast<long>(width()) * height(); }
  bool valid() const noexcept { return x_min <= x_max && y_min <= y_max; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) noexcept;
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Row-major 8-bit luminance image.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, std::uint8_t fill = 0);
  Raster(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t at(int x, int y) const noexcept { return pixels_[index(x, y)]; }
  void set(int x, int y, std::uint8_t v) noexcept { pixels_[index(x, y)] = v; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Row-major bitmap. A set bit is always foreground (ink); producers that
/// start from dark-on-light or light-on-dark images pick the polarity when
/// calling binarize().
class BinaryRaster {
 public:
  BinaryRaster() = default;
  BinaryRaster(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v) noexcept { bits_[index(x, y)] = v ? 1 : 0; }
  bool contains(const BoundingBox& b) const noexcept {
    return b.valid() && b.x_min >= 0 && b.y_min >= 0 && b.x_max < width_ && b.y_max < height_;
  }
  BoundingBox full_box() const noexcept { return {0, 0, width_ - 1, height_ - 1}; }
  std::size_t count() const noexcept;
  /// One byte per pixel, 0 or 1.
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryRaster&, const BinaryRaster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct Component {
  BoundingBox box;
  std::size_t pixel_count = 0;

  friend bool operator==(const Component&, const Component&) = default;
};

inline constexpr std::uint8_t kDefaultThreshold = 128;

/// foreground_is_light: pixel >= threshold is ink; otherwise pixel < threshold is ink.
BinaryRaster binarize(const Raster& img, std::uint8_t threshold, bool foreground_is_light);
BinaryRaster invert(const BinaryRaster& img);

/// Maximal 8-connected foreground regions, ordered by (y_min, x_min) and
/// then by raster order of their first pixel.
std::vector<Component> connected_components(const BinaryRaster& img);

BinaryRaster crop(const BinaryRaster& img, const BoundingBox& box);

/// Tight box around the ink inside `region` (defaults to the whole image).
/// Throws EmptyRegion when the region holds no ink.
BoundingBox ink_extent(const BinaryRaster& img, const BoundingBox& region);
BoundingBox ink_extent(const BinaryRaster& img);

struct Trimmed {
  BinaryRaster image;
  BoundingBox box;
};
Trimmed trim_whitespace(const BinaryRaster& img);

/// Bilinear resize with corner-aligned sampling, rounded to nearest.
Raster resize(const Raster& img, int width, int height);

/// Same sampling rule on a real-valued plane; used for occupancy maps.
std::vector<double> resize_bilinear(std::span<const double> src, int src_w, int src_h, int dst_w, int dst_h);

Raster to_raster(const BinaryRaster& img, std::uint8_t ink = 255, std::uint8_t background = 0);

/// Interleaved 8-bit RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
  const std::uint8_t* at(int x, int y) const noexcept {
    return &data[(static_cast<std::size_t>(y) * width + x) * 3];
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

}  // namespace glyphforge
