#include "glyphforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "glyphforge/detect.hpp"
#include "glyphforge/error.hpp"
#include "glyphforge/font.hpp"
#include "glyphforge/image_io.hpp"

namespace glyphforge {

namespace fs = std::filesystem;

namespace {

constexpr int kDotClearance = 2;
constexpr int kMinLetterGap = 2;

struct Pixel {
  int x = 0;
  int y = 0;
};

struct Placed {
  char ch = 0;
  std::size_t line = 0;
  int cell_x = 0;
  int cell_w = 0;
  std::vector<Pixel> body;
  std::vector<Pixel> dot;
  BoundingBox body_box;
  int dot_shift = 0;
};

BoundingBox bounds(const std::vector<Pixel>& px) {
  BoundingBox b{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), std::numeric_limits<int>::min(),
                std::numeric_limits<int>::min()};
  for (const auto& p : px) b = {std::min(b.x_min, p.x), std::min(b.y_min, p.y), std::max(b.x_max, p.x),
                                std::max(b.y_max, p.y)};
  return b;
}

double center_x(const BoundingBox& b) { return (b.x_min + b.x_max) / 2.0; }

// Nearest-neighbour scaling of a font bitmap into a w x h cell.
template <class Emit>
void rasterize(const font::Bitmap& b, int w, int h, Emit&& emit) {
  for (int ty = 0; ty < h; ++ty) {
    const int row = std::min(font::kRows - 1, ty * font::kRows / h);
    for (int tx = 0; tx < w; ++tx) {
      const int col = std::min(b.width - 1, tx * b.width / w);
      if (b.ink(col, row)) emit(tx, ty, row);
    }
  }
}

bool fusable(char c) { return font::find(c)->width == 5 && font::dot_rows(c) == 0; }

std::vector<std::vector<std::string>> make_text(const SyntheticSpec& spec, Rng& rng) {
  std::vector<std::vector<std::string>> lines;
  if (!spec.text.empty()) {
    for (const auto& line : spec.text) {
      std::istringstream is(line);
      std::vector<std::string> words;
      for (std::string w; is >> w;) {
        for (char c : w) {
          if (c < 'a' || c > 'z') throw Error(ErrorCode::InvalidArgument, std::string("cannot render '") + c + "'");
        }
        words.push_back(w);
      }
      if (words.empty()) throw Error(ErrorCode::InvalidArgument, "empty text line");
      lines.push_back(std::move(words));
    }
    return lines;
  }
  for (std::size_t l = 0; l < spec.lines; ++l) {
    std::vector<std::string> words;
    for (std::size_t w = 0; w < spec.words_per_line; ++w) {
      const int len = uniform_int(rng, static_cast<int>(spec.min_word), static_cast<int>(spec.max_word));
      std::string word;
      for (int k = 0; k < len; ++k) word += static_cast<char>('a' + uniform_int(rng, 0, 25));
      words.push_back(word);
    }
    lines.push_back(std::move(words));
  }
  return lines;
}

// Joins the bottom stroke rows of two touching glyphs.
void add_ligature(Placed& first, Placed& second, const std::vector<int>& bottom_rows) {
  for (int y : bottom_rows) {
    int right = std::numeric_limits<int>::min();
    int left = std::numeric_limits<int>::max();
    for (const auto& p : first.body) {
      if (p.y == y) right = std::max(right, p.x);
    }
    for (const auto& p : second.body) {
      if (p.y == y) left = std::min(left, p.x);
    }
    if (right == std::numeric_limits<int>::min() || left == std::numeric_limits<int>::max()) continue;
    for (int x = right + 1; x < left; ++x) {
      (x < first.cell_x + first.cell_w ? first.body : second.body).push_back({x, y});
    }
  }
}

// Lateral dot shift, clamped so the dot keeps clear of neighbouring glyphs
// and stays nearer its own stem than any neighbour's.
int place_dot(const std::vector<Placed>& glyphs, std::size_t i, const BoundingBox* prev_dot, int wanted) {
  const auto& g = glyphs[i];
  const BoundingBox d = bounds(g.dot);
  const double dc = center_x(d);
  const double own = center_x(g.body_box);
  double lo = -1e9;
  double hi = 1e9;
  if (i > 0 && glyphs[i - 1].line == g.line) {
    const auto& p = glyphs[i - 1].body_box;
    lo = std::max(lo, static_cast<double>(p.x_max + kDotClearance + 1 - d.x_min));
    lo = std::max(lo, std::ceil((own + center_x(p)) / 2.0 + 1.0 - dc));
  }
  if (prev_dot) lo = std::max(lo, static_cast<double>(prev_dot->x_max + kDotClearance + 1 - d.x_min));
  if (i + 1 < glyphs.size() && glyphs[i + 1].line == g.line) {
    const auto& n = glyphs[i + 1].body_box;
    hi = std::min(hi, static_cast<double>(n.x_min - kDotClearance - 1 - d.x_max));
    hi = std::min(hi, std::floor((own + center_x(n)) / 2.0 - 1.0 - dc));
  }
  if (lo > hi) return 0;
  return static_cast<int>(std::clamp(static_cast<double>(wanted), lo, hi));
}

}  // namespace

void SyntheticSpec::validate() const {
  if (scale < 1) throw Error(ErrorCode::InvalidArgument, "scale must be >= 1");
  if (scale_noise < 0.0 || scale_noise >= 0.5) throw Error(ErrorCode::InvalidArgument, "scale_noise must be in [0, 0.5)");
  if (jitter_x < 0 || jitter_y < 0 || dot_offset < 0) throw Error(ErrorCode::InvalidArgument, "jitter must be >= 0");
  if (letter_gap < 0.0 || word_gap <= letter_gap) throw Error(ErrorCode::InvalidArgument, "word_gap must exceed letter_gap");
  if (line_pitch < 1.5) throw Error(ErrorCode::InvalidArgument, "line_pitch must be >= 1.5");
  if (fuse_probability < 0.0 || fuse_probability > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "fuse_probability must be in [0, 1]");
  }
  if (margin < jitter_x + jitter_y + dot_offset) throw Error(ErrorCode::InvalidArgument, "margin too small for jitter");
  if (text.empty() && (lines < 1 || words_per_line < 1 || min_word < 1 || max_word < min_word)) {
    throw Error(ErrorCode::InvalidArgument, "random text needs lines, words and word lengths >= 1");
  }
}

SyntheticPage render_page(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  const auto lines = make_text(spec, rng);
  const double nominal_w = 5.0 * spec.scale;
  const int max_h = static_cast<int>(std::lround(font::kRows * spec.scale * (1.0 + spec.scale_noise)));
  const int pitch = static_cast<int>(std::lround(spec.line_pitch * font::kRows * spec.scale));
  const int letter_gap = static_cast<int>(std::lround(spec.letter_gap * nominal_w));
  const int word_gap = static_cast<int>(std::lround(spec.word_gap * nominal_w));

  SyntheticPage out;
  std::vector<Placed> glyphs;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (l > 0) out.text += '\n';
    const int baseline = spec.margin + spec.jitter_y + max_h - 1 + static_cast<int>(l) * pitch;
    int x = spec.margin + spec.jitter_x;
    for (std::size_t wi = 0; wi < lines[l].size(); ++wi) {
      const auto& word = lines[l][wi];
      if (wi > 0) {
        out.text += ' ';
        x += word_gap + (spec.jitter_x ? uniform_int(rng, -spec.jitter_x, spec.jitter_x) : 0);
      }
      std::vector<bool> fuse_next(word.size(), false);
      for (std::size_t k = 0; k + 1 < word.size(); ++k) {
        if (k > 0 && fuse_next[k - 1]) continue;
        if (fusable(word[k]) && fusable(word[k + 1]) && spec.fuse_probability > 0.0 &&
            bernoulli(rng, spec.fuse_probability)) {
          fuse_next[k] = true;
        }
      }

      double s = spec.scale;
      int dy = 0;
      std::vector<int> bottom_rows;
      for (std::size_t k = 0; k < word.size(); ++k) {
        const char c = word[k];
        const bool second = k > 0 && fuse_next[k - 1];
        const auto& bm = *font::find(c);
        if (!second) {
          // Dotted letters keep the nominal size so their stems stay the
          // narrowest boxes on the page.
          s = spec.scale;
          if (spec.scale_noise > 0.0) {
            const double u = uniform(rng, -spec.scale_noise, spec.scale_noise);
            if (font::dot_rows(c) == 0) s *= 1.0 + u;
          }
          dy = spec.jitter_y ? uniform_int(rng, -spec.jitter_y, spec.jitter_y) : 0;
        }
        const int w = std::max(1, static_cast<int>(std::lround(bm.width * s)));
        const int h = std::max(font::kRows, static_cast<int>(std::lround(font::kRows * s)));
        const int top = baseline - h + 1 + dy;

        Placed p;
        p.ch = c;
        p.line = l;
        p.cell_x = x;
        p.cell_w = w;
        std::vector<int> rows6;
        const int dot_rows = font::dot_rows(c);
        rasterize(bm, w, h, [&](int tx, int ty, int row) {
          (row < dot_rows ? p.dot : p.body).push_back({x + tx, top + ty});
        });
        for (int ty = 0; ty < h; ++ty) {
          if (std::min(font::kRows - 1, ty * font::kRows / h) == font::kRows - 1) rows6.push_back(top + ty);
        }
        if (second) {
          add_ligature(glyphs.back(), p, bottom_rows);
          out.fused.push_back({glyphs.size() - 1, glyphs.size()});
        }
        bottom_rows = rows6;
        glyphs.push_back(std::move(p));
        out.text += c;

        x += w;
        if (k + 1 < word.size() && !fuse_next[k]) {
          const int jitter = spec.jitter_x ? uniform_int(rng, -spec.jitter_x, spec.jitter_x) : 0;
          x += std::max(kMinLetterGap, letter_gap + jitter);
        }
      }
    }
  }

  for (auto& g : glyphs) g.body_box = bounds(g.body);
  std::optional<BoundingBox> prev_dot;
  std::size_t prev_dot_line = 0;
  for (std::size_t i = 0; i < glyphs.size(); ++i) {
    auto& g = glyphs[i];
    if (g.dot.empty()) continue;
    const int wanted = spec.dot_offset ? uniform_int(rng, -spec.dot_offset, spec.dot_offset) : 0;
    const BoundingBox* pd = prev_dot && prev_dot_line == g.line ? &*prev_dot : nullptr;
    g.dot_shift = place_dot(glyphs, i, pd, wanted);
    for (auto& p : g.dot) p.x += g.dot_shift;
    prev_dot = bounds(g.dot);
    prev_dot_line = g.line;
    out.dots.push_back({i, g.dot_shift, *prev_dot});
  }

  int max_x = 0;
  int max_y = 0;
  for (const auto& g : glyphs) {
    const auto b = g.dot.empty() ? g.body_box : union_box(g.body_box, bounds(g.dot));
    max_x = std::max(max_x, b.x_max);
    max_y = std::max(max_y, b.y_max);
    out.glyphs.push_back({b, g.ch});
  }
  out.page = BinaryRaster(max_x + 1 + spec.margin, max_y + 1 + spec.margin);
  for (const auto& g : glyphs) {
    for (const auto& p : g.body) out.page.set(p.x, p.y, true);
    for (const auto& p : g.dot) out.page.set(p.x, p.y, true);
  }
  return out;
}

std::string truth_json(const SyntheticPage& page) {
  using nlohmann::json;
  auto box_json = [](const BoundingBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); };
  json glyphs = json::array();
  for (const auto& g : page.glyphs) glyphs.push_back({{"box", box_json(g.box)}, {"char", std::string(1, g.ch)}});
  json fused = json::array();
  for (const auto& f : page.fused) fused.push_back(json::array({f.first, f.second}));
  json dots = json::array();
  for (const auto& d : page.dots) dots.push_back({{"glyph", d.glyph}, {"offset", d.offset}, {"box", box_json(d.dot)}});
  const json j = {{"text", page.text},
                  {"width", page.page.width()},
                  {"height", page.page.height()},
                  {"glyphs", glyphs},
                  {"events", {{"fused", fused}, {"dots", dots}}}};
  return j.dump(2) + "\n";
}

void gen_corpus(const fs::path& out_dir, const SyntheticSpec& spec, std::size_t pages, std::uint64_t seed) {
  fs::create_directories(out_dir);
  for (std::size_t k = 0; k < pages; ++k) {
    Rng rng(mix_seed(seed, k));
    const auto page = render_page(spec, rng);
    char stem[32];
    std::snprintf(stem, sizeof stem, "page_%04zu", k);
    write_png(out_dir / (std::string(stem) + ".png"), to_raster(page.page, 0, 255));
    const auto j = truth_json(page);
    write_file(out_dir / (std::string(stem) + ".json"), std::vector<std::uint8_t>(j.begin(), j.end()));
  }
}

SyntheticPage render_letter(char letter, const SyntheticSpec& spec, Rng& rng) {
  SyntheticSpec one = spec;
  one.text = {std::string(1, letter)};
  one.fuse_probability = 0.0;
  return render_page(one, rng);
}

Raster render_screening_sample(int label, int size, Rng& rng) {
  if (label != 0 && label != 1) throw Error(ErrorCode::InvalidArgument, "label must be 0 or 1");
  Raster img(size, size, 0);
  const bool erratic = label == 1;
  const int margin = 6;
  const double base = 2.0;
  const int pitch = erratic ? 26 : 22;
  int baseline = margin + static_cast<int>(font::kRows * (erratic ? 3.6 : base));
  while (baseline < size - margin) {
    int x = margin + (erratic ? uniform_int(rng, 0, 10) : 0);
    bool line_full = false;
    while (!line_full) {
      const int len = uniform_int(rng, 2, 5);
      for (int k = 0; k < len; ++k) {
        const char c = static_cast<char>('a' + uniform_int(rng, 0, 25));
        const auto& bm = *font::find(c);
        const double s = erratic ? uniform(rng, 1.2, 3.6) : base;
        const int dy = erratic ? uniform_int(rng, -6, 6) : 0;
        const int w = std::max(1, static_cast<int>(std::lround(bm.width * s)));
        const int h = static_cast<int>(std::lround(font::kRows * s));
        if (x + w >= size - margin) {
          line_full = true;
          break;
        }
        const int top = baseline - h + 1 + dy;
        rasterize(bm, w, h, [&](int tx, int ty, int) {
          const int px = x + tx;
          const int py = top + ty;
          if (px >= 0 && py >= 0 && px < size && py < size) img.set(px, py, 255);
        });
        x += w + (erratic ? uniform_int(rng, 0, 7) : 2);
      }
      x += erratic ? uniform_int(rng, 4, 16) : 8;
    }
    baseline += pitch + (erratic ? uniform_int(rng, -3, 6) : 0);
  }
  return img;
}

void gen_screening_corpus(const fs::path& out_dir, std::size_t per_class, int size, std::uint64_t seed) {
  for (int label = 0; label < 2; ++label) {
    const auto dir = out_dir / kDefaultClassNames[label];
    fs::create_directories(dir);
    for (std::size_t k = 0; k < per_class; ++k) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label) * 1000003ULL + k));
      char name[32];
      std::snprintf(name, sizeof name, "sample_%04zu.png", k);
      write_png(dir / name, render_screening_sample(label, size, rng));
    }
  }
}

}  // namespace glyphforge
