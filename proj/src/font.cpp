#include "glyphforge/font.hpp"

namespace glyphforge::font {

namespace {

// clang-format off
constexpr Bitmap kLetters[26] = {
  {5, {".....", ".....", ".###.", "....#", ".####", "#...#", ".####"}},  // a
  {5, {"#....", "#....", "####.", "#...#", "#...#", "#...#", "####."}},  // b
  {5, {".....", ".....", ".####", "#....", "#....", "#....", ".####"}},  // c
  {5, {"....#", "....#", ".####", "#...#", "#...#", "#...#", ".####"}},  // d
  {5, {".....", ".....", ".###.", "#...#", "#####", "#....", ".####"}},  // e
  {4, {"..##", ".#..", ".#..", "####", ".#..", ".#..", ".#.."}},         // f
  {5, {".....", ".....", ".####", "#...#", ".####", "....#", ".###."}},  // g
  {5, {"#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#"}},  // h
  {2, {"#.", "..", "#.", "#.", "#.", "#.", "##"}},                       // i
  {2, {".#", "..", ".#", ".#", ".#", ".#", "#."}},                       // j
  {5, {"#....", "#....", "#...#", "#..#.", "###..", "#..#.", "#...#"}},  // k
  {3, {"##.", ".#.", ".#.", ".#.", ".#.", ".#.", ".##"}},                // l
  {5, {".....", ".....", "####.", "#.#.#", "#.#.#", "#.#.#", "#.#.#"}},  // m
  {5, {".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#"}},  // n
  {5, {".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###."}},  // o
  {5, {".....", ".....", "####.", "#...#", "####.", "#....", "#...."}},  // p
  {5, {".....", ".....", ".####", "#...#", ".####", "....#", "....#"}},  // q
  {4, {"....", "....", "#.##", "##..", "#...", "#...", "#..."}},         // r
  {5, {".....", ".....", ".####", "#....", ".###.", "....#", "####."}},  // s
  {4, {".#..", ".#..", "####", ".#..", ".#..", ".#..", "..##"}},         // t
  {5, {".....", ".....", "#...#", "#...#", "#...#", "#...#", ".####"}},  // u
  {5, {".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},  // v
  {5, {".....", ".....", "#...#", "#...#", "#.#.#", "#.#.#", ".#.#."}},  // w
  {5, {".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#"}},  // x
  {5, {".....", ".....", "#...#", "#...#", ".####", "....#", ".###."}},  // y
  {5, {".....", ".....", "#####", "...#.", "..#..", ".#...", "#####"}},  // z
};

constexpr Bitmap kDigits[10] = {
  {5, {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
  {5, {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
  {5, {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
  {5, {"####.", "....#", "....#", ".###.", "....#", "....#", "####."}},
  {5, {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
  {5, {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
  {5, {".###.", "#....", "#....", "####.", "#...#", "#...#", ".###."}},
  {5, {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
  {5, {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
  {5, {".###.", "#...#", "#...#", ".####", "....#", "....#", ".###."}},
};
// clang-format on

constexpr Bitmap kSpace{3, {"...", "...", "...", "...", "...", "...", "..."}};

}  // namespace

const Bitmap* find(char c) {
  if (c >= 'a' && c <= 'z') return &kLetters[c - 'a'];
  if (c >= '0' && c <= '9') return &kDigits[c - '0'];
  if (c == ' ') return &kSpace;
  return nullptr;
}

int dot_rows(char c) { return c == 'i' || c == 'j' ? 1 : 0; }

int text_width(std::string_view text, int scale) {
  int w = 0;
  for (char c : text) {
    if (const auto* b = find(c)) w += (w ? 1 : 0) + b->width;
  }
  return w * scale;
}

void draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color, int scale) {
  int cx = x;
  for (char c : text) {
    const auto* b = find(c);
    if (!b) continue;
    for (int row = 0; row < kRows; ++row) {
      for (int col = 0; col < b->width; ++col) {
        if (!b->ink(col, row)) continue;
        for (int dy = 0; dy < scale; ++dy) {
          for (int dx = 0; dx < scale; ++dx) {
            const int px = cx + col * scale + dx;
            const int py = y + row * scale + dy;
            if (px >= 0 && py >= 0 && px < img.width && py < img.height) img.set(px, py, color.r, color.g, color.b);
          }
        }
      }
    }
    cx += (b->width + 1) * scale;
  }
}

}  // namespace glyphforge::font
