#include <gtest/gtest.h>

#include "glyphforge/error.hpp"
#include "glyphforge/rng.hpp"
#include "glyphforge/segmenter.hpp"

using namespace glyphforge;

namespace {

void fill(BinaryRaster& page, const BoundingBox& b) {
  for (int y = b.y_min; y <= b.y_max; ++y)
    for (int x = b.x_min; x <= b.x_max; ++x) page.set(x, y, true);
}

// Hollow rectangle: a ring one pixel thick.
void ring(BinaryRaster& page, const BoundingBox& b) {
  for (int x = b.x_min; x <= b.x_max; ++x) {
    page.set(x, b.y_min, true);
    page.set(x, b.y_max, true);
  }
  for (int y = b.y_min; y <= b.y_max; ++y) {
    page.set(b.x_min, y, true);
    page.set(b.x_max, y, true);
  }
}

}  // namespace

TEST(MedianDims, Examples) {
  auto widths = [](std::vector<int> ws) {
    std::vector<BoundingBox> boxes;
    for (int w : ws) boxes.push_back({0, 0, w - 1, 0});
    return median_dims(boxes).width;
  };
  EXPECT_EQ(widths({3, 5, 7}), 5);
  EXPECT_EQ(widths({4, 6}), 5);
  EXPECT_EQ(widths({4, 5}), 5);  // 4.5 rounds half up
  EXPECT_EQ(widths({7}), 7);
  try {
    median_dims({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(SliceColumns, FloorBoundaries) {
  const auto cols = slice_columns({0, 0, 31, 0}, 3);
  ASSERT_EQ(cols.size(), 3u);
  EXPECT_EQ(cols[0], std::make_pair(0, 9));
  EXPECT_EQ(cols[1], std::make_pair(10, 20));
  EXPECT_EQ(cols[2], std::make_pair(21, 31));
}

TEST(SliceColumns, PartitionProperty) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int x0 = uniform_int(rng, 0, 50);
    const int w = uniform_int(rng, 2, 200);
    const int n = uniform_int(rng, 2, std::min(w, 12));
    const auto cols = slice_columns({x0, 0, x0 + w - 1, 0}, n);
    ASSERT_EQ(static_cast<int>(cols.size()), n);
    EXPECT_EQ(cols.front().first, x0);
    EXPECT_EQ(cols.back().second, x0 + w - 1);
    for (std::size_t i = 1; i < cols.size(); ++i) EXPECT_EQ(cols[i].first, cols[i - 1].second + 1);
    for (auto [a, b] : cols) {
      EXPECT_GE(b - a + 1, w / n);
      EXPECT_LE(b - a + 1, w / n + 1);
    }
  }
}

TEST(SplitWideBoxes, BelowThresholdUnchanged) {
  BinaryRaster page(40, 20);
  fill(page, {0, 0, 9, 9});
  SegmenterConfig cfg;
  const std::vector<BoundingBox> boxes{{0, 0, 9, 9}};
  EXPECT_EQ(split_wide_boxes(page, boxes, 10, cfg), boxes);
}

TEST(SplitWideBoxes, SlicesAreTrimmed) {
  BinaryRaster page(40, 20);
  fill(page, {0, 0, 31, 9});
  const auto out = split_wide_boxes(page, {{0, 0, 31, 9}}, 10, SegmenterConfig{});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0], (BoundingBox{0, 0, 9, 9}));
  EXPECT_EQ(out[1], (BoundingBox{10, 0, 20, 9}));
  EXPECT_EQ(out[2], (BoundingBox{21, 0, 31, 9}));
}

TEST(SplitWideBoxes, FusedPairSplitsIntoTightGlyphs) {
  // Two rings of different heights touching along a column, plus narrow
  // neighbours that fix the median width at 10.
  BinaryRaster page(80, 30);
  const BoundingBox left{20, 5, 29, 20};
  const BoundingBox right{30, 10, 39, 20};
  ring(page, left);
  ring(page, right);
  const BoundingBox n1{0, 5, 9, 20}, n2{50, 5, 59, 20}, n3{65, 5, 74, 20};
  for (const auto& b : {n1, n2, n3}) ring(page, b);

  SegmenterConfig cfg;
  const auto boxes = extract_boxes(page, cfg);
  ASSERT_EQ(boxes.size(), 4u);
  EXPECT_EQ(median_dims(boxes).width, 10);
  const auto out = segment_boxes(page, cfg);
  ASSERT_EQ(out.size(), 5u);
  EXPECT_NE(std::find(out.begin(), out.end(), left), out.end());
  EXPECT_NE(std::find(out.begin(), out.end(), right), out.end());
}

TEST(MergeDotted, MinimumWidthStem) {
  BinaryRaster page(50, 30);
  const BoundingBox dot{10, 2, 13, 5}, stem{9, 8, 12, 24}, body{30, 8, 45, 24};
  for (const auto& b : {dot, stem, body}) fill(page, b);
  const auto out = merge_dotted(page, {dot, stem, body}, 12, 18, SegmenterConfig{});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (BoundingBox{9, 2, 13, 24}));
  EXPECT_EQ(out[1], body);
}

TEST(MergeDotted, PrefersNarrowestThenNearest) {
  BinaryRaster page(60, 30);
  const BoundingBox dot{20, 2, 21, 3};
  const BoundingBox wide{14, 8, 25, 20};    // overlaps, width 12
  const BoundingBox narrow{24, 8, 26, 20};  // within slack, width 3
  for (const auto& b : {dot, wide, narrow}) fill(page, b);
  const auto out = merge_dotted(page, {dot, wide, narrow}, 12, 13, SegmenterConfig{});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (BoundingBox{20, 2, 26, 20}));
  EXPECT_EQ(out[1], wide);
}

TEST(MergeDotted, NoDotsIsIdentity) {
  BinaryRaster page(30, 30);
  const std::vector<BoundingBox> boxes{{0, 0, 9, 9}, {15, 0, 24, 9}};
  for (const auto& b : boxes) fill(page, b);
  EXPECT_EQ(merge_dotted(page, boxes, 10, 10, SegmenterConfig{}), boxes);
}

TEST(MergeDotted, OrphanDotDropped) {
  BinaryRaster page(60, 30);
  const BoundingBox dot{50, 20, 51, 21}, a{0, 0, 9, 9}, b{15, 0, 24, 9};
  for (const auto& x : {dot, a, b}) fill(page, x);
  const auto out = merge_dotted(page, {a, b, dot}, 10, 10, SegmenterConfig{});
  EXPECT_EQ(out, (std::vector<BoundingBox>{a, b}));
}

TEST(MergeDotted, EachStemTakesOneDot) {
  BinaryRaster page(30, 30);
  const BoundingBox d1{5, 0, 6, 1}, d2{5, 3, 6, 4}, stem{4, 8, 7, 20}, other{20, 8, 27, 20};
  for (const auto& x : {d1, d2, stem, other}) fill(page, x);
  const auto out = merge_dotted(page, {d1, d2, stem, other}, 8, 13, SegmenterConfig{});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (BoundingBox{4, 0, 7, 20}));
  EXPECT_EQ(out[1], other);
}

TEST(MergeDotted, NeverIncreasesCount) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    BinaryRaster page(64, 64);
    std::vector<BoundingBox> boxes;
    for (int k = 0; k < 8; ++k) {
      const int x = uniform_int(rng, 0, 56), y = uniform_int(rng, 0, 56);
      const BoundingBox b{x, y, x + uniform_int(rng, 0, 7), y + uniform_int(rng, 0, 7)};
      fill(page, b);
      boxes.push_back(b);
    }
    const auto out = merge_dotted(page, boxes, 6, 6, SegmenterConfig{});
    EXPECT_LE(out.size(), boxes.size());
  }
}

TEST(ExtractBoxes, NoiseAndDots) {
  BinaryRaster page(60, 40);
  fill(page, {10, 10, 13, 25});  // stem
  fill(page, {30, 10, 35, 25});
  fill(page, {45, 10, 50, 25});
  page.set(11, 7, true);  // 1-px dot above the stem
  page.set(2, 35, true);  // stray speck, no stem below
  SegmenterConfig cfg;
  const auto boxes = extract_boxes(page, cfg);
  ASSERT_EQ(boxes.size(), 4u);
  EXPECT_EQ(boxes[0], (BoundingBox{11, 7, 11, 7}));
  const auto merged = segment_boxes(page, cfg);
  ASSERT_EQ(merged.size(), 3u);
  EXPECT_EQ(merged[0], (BoundingBox{10, 7, 13, 25}));
}

TEST(NormalizeGlyph, IdentityAtGlyphSize) {
  BinaryRaster page(50, 50);
  Rng rng(1);
  ring(page, {5, 5, 44, 44});
  for (int k = 0; k < 200; ++k) page.set(uniform_int(rng, 6, 43), uniform_int(rng, 6, 43), true);
  const auto g = normalize_glyph(page, {5, 5, 44, 44}, SegmenterConfig{});
  EXPECT_EQ(g.image, crop(page, {5, 5, 44, 44}));
}

TEST(NormalizeGlyph, AspectAndCentering) {
  BinaryRaster page(30, 40);
  fill(page, {3, 4, 22, 33});  // 20 x 30
  const auto g = normalize_glyph(page, page.full_box(), SegmenterConfig{});
  EXPECT_EQ(ink_extent(g.image), (BoundingBox{6, 0, 32, 39}));
  EXPECT_EQ(g.image.count(), 27u * 40u);
  EXPECT_EQ(g.source_box, page.full_box());
}

TEST(NormalizeGlyph, SinglePixel) {
  BinaryRaster page(9, 9);
  page.set(4, 4, true);
  const auto g = normalize_glyph(page, page.full_box(), SegmenterConfig{});
  EXPECT_EQ(g.image.width(), 40);
  EXPECT_GT(g.image.count(), 0u);
  const auto e = ink_extent(g.image);
  EXPECT_EQ(e.x_min + e.x_max, 39);
  EXPECT_EQ(e.y_min + e.y_max, 39);
}

TEST(NormalizeGlyph, HairlineSurvivesDownscale) {
  BinaryRaster page(200, 5);
  for (int x = 0; x < 200; x += 2) page.set(x, 2, true);
  const auto g = normalize_glyph(page, page.full_box(), SegmenterConfig{});
  EXPECT_GT(g.image.count(), 0u);
}

TEST(NormalizeGlyph, EmptyRegionThrows) {
  BinaryRaster page(10, 10);
  try {
    normalize_glyph(page, page.full_box(), SegmenterConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRegion);
  }
}

TEST(SegmentPage, EmptyPage) { EXPECT_TRUE(segment_page(BinaryRaster(20, 20), SegmenterConfig{}).empty()); }

TEST(SegmentPage, GlyphsAreFullSizeAndDeterministic) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    BinaryRaster page(120, 60);
    for (int k = 0; k < 12; ++k) {
      const int x = uniform_int(rng, 0, 110), y = uniform_int(rng, 0, 50);
      ring(page, {x, y, x + uniform_int(rng, 2, 9), y + uniform_int(rng, 2, 9)});
    }
    const auto a = segment_page(page, SegmenterConfig{}, "p");
    const auto b = segment_page(page, SegmenterConfig{}, "p");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].box, b[i].box);
      EXPECT_EQ(a[i].glyph, b[i].glyph);
      EXPECT_EQ(a[i].glyph.image.width(), 40);
      EXPECT_EQ(a[i].glyph.image.height(), 40);
      EXPECT_GT(a[i].glyph.image.count(), 0u);
      if (i > 0) {
        EXPECT_LE(std::tie(a[i - 1].box.y_min, a[i - 1].box.x_min), std::tie(a[i].box.y_min, a[i].box.x_min));
      }
    }
  }
}

TEST(SegmenterConfig, Validation) {
  SegmenterConfig cfg;
  cfg.split_factor = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.min_component_pixels = 0;
  EXPECT_THROW(cfg.validate(), Error);
}
