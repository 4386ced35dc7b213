#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glyphforge/raster.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge {

/// Parameters of the synthetic handwriting renderer. Distances given as
/// factors are relative to the nominal glyph width (5 font columns x scale)
/// or the nominal cell height (7 rows x scale).
struct SyntheticSpec {
  int scale = 4;
  double scale_noise = 0.0;  // per-glyph relative scale variation, uniform in +-noise
  int jitter_x = 0;          // +-px added to every letter gap
  int jitter_y = 0;          // +-px baseline shift per glyph
  double letter_gap = 0.2;
  double word_gap = 2.0;
  double line_pitch = 3.0;
  double fuse_probability = 0.0;  // chance that two adjacent full-width letters touch
  int dot_offset = 0;             // +-px lateral shift of i/j dots
  int margin = 16;
  std::size_t lines = 3;
  std::size_t words_per_line = 3;
  std::size_t min_word = 2;
  std::size_t max_word = 6;
  std::vector<std::string> text;  // explicit lines of a-z words; overrides the random text

  void validate() const;
};

struct GlyphTruth {
  BoundingBox box;
  char ch = 0;
};

struct FuseEvent {
  std::size_t first = 0;  // glyph indices
  std::size_t second = 0;
};

struct DotEvent {
  std::size_t glyph = 0;
  int offset = 0;  // applied lateral shift after clamping
  BoundingBox dot;
};

struct SyntheticPage {
  BinaryRaster page;
  std::string text;  // words joined by ' ', lines by '\n'
  std::vector<GlyphTruth> glyphs;  // in writing order
  std::vector<FuseEvent> fused;
  std::vector<DotEvent> dots;
};

SyntheticPage render_page(const SyntheticSpec& spec, Rng& rng);

/// {text, width, height, glyphs:[{box:[x0,y0,x1,y1], char}], events:{fused:[[i,j]], dots:[{glyph, offset, box}]}}
std::string truth_json(const SyntheticPage& page);

/// Writes page_NNNN.png (dark ink on white) and page_NNNN.json for each page;
/// page k draws from its own stream derived from (seed, k).
void gen_corpus(const std::filesystem::path& out_dir, const SyntheticSpec& spec, std::size_t pages,
                std::uint64_t seed);

/// Handwriting sample for the screening task, light ink on black. Label 0
/// renders regular writing; label 1 renders writing with erratic glyph size,
/// baseline and spacing.
Raster render_screening_sample(int label, int size, Rng& rng);

/// Two class folders under out_dir (named after the screening classes) with
/// per_class PNG samples each.
void gen_screening_corpus(const std::filesystem::path& out_dir, std::size_t per_class, int size,
                          std::uint64_t seed);

/// One page per sample holding a single glyph of `letter`, rendered with the
/// given spec's noise settings; used to build glyph training sets.
SyntheticPage render_letter(char letter, const SyntheticSpec& spec, Rng& rng);

}  // namespace glyphforge
