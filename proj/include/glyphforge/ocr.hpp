#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "glyphforge/layout.hpp"
#include "glyphforge/nn/adam.hpp"
#include "glyphforge/nn/model.hpp"
#include "glyphforge/raster.hpp"
#include "glyphforge/rng.hpp"
#include "glyphforge/segmenter.hpp"
#include "glyphforge/synth.hpp"

namespace glyphforge {

inline constexpr std::size_t kLetterCount = 26;

struct AugmentConfig {
  double rotate_probability = 0.3;
  double rotate_degrees = 15.0;  // angle drawn uniformly from [-deg, +deg]
  double blur_probability = 0.3;

  void validate() const;
};

/// Rotation about the glyph centre with bilinear sampling, re-binarized at
/// 0.5. Content that would leave the frame is re-trimmed and recentred.
BinaryRaster rotate_glyph(const BinaryRaster& img, double degrees);
/// 3x3 box mean (outside counts as background), re-binarized at 0.5.
BinaryRaster box_blur(const BinaryRaster& img);
/// Always draws the same number of values from rng, whatever fires.
Glyph augment(const Glyph& glyph, const AugmentConfig& cfg, Rng& rng);

/// SHA-256 over the glyph size and pixels, lowercase hex.
std::string glyph_hash(const Glyph& glyph);

int letter_index(char letter);  // -1 outside a-z

struct CharSample {
  Glyph glyph;
  int label = 0;  // 0..25, 'a' + label
};

struct CharDatasetConfig {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  SegmenterConfig segmenter;
  AugmentConfig augment;
};

struct CharDataset {
  std::vector<CharSample> samples;
  std::vector<std::size_t> train;  // indices into samples
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  AugmentConfig augment;
};

/// Per class, floor(test_fraction x count) samples go to the test split.
/// Throws EmptyStore when samples is empty.
CharDataset make_char_dataset(std::vector<CharSample> samples, const CharDatasetConfig& cfg);

struct LabeledBox {
  std::string page_id;
  BoundingBox box;
  char letter = 0;
  std::string hash;  // checked against the re-derived glyph when nonempty
};

using PageSource = std::function<BinaryRaster(const std::string& page_id)>;

/// Re-derives every glyph from its page and box. Throws EmptyStore,
/// UnknownLabel, HashMismatch.
CharDataset build_char_dataset(const std::vector<LabeledBox>& records, const PageSource& pages,
                               const CharDatasetConfig& cfg);

/// Training samples of one epoch (1-based) with augmentation applied; the
/// stream depends only on the dataset seed and the epoch.
std::vector<CharSample> training_epoch(const CharDataset& ds, std::size_t epoch);

/// per_letter single-glyph renders of every letter, normalized from their
/// true boxes.
std::vector<CharSample> synthetic_glyphs(std::size_t per_letter, const SyntheticSpec& spec,
                                         const SegmenterConfig& seg, std::uint64_t seed);

nn::Tensor glyph_tensor(const Glyph& glyph);

struct CharTrainConfig {
  std::size_t epochs = 4;
  std::size_t batch_size = 32;
  nn::AdamConfig adam;
  std::uint64_t seed = 0;

  void validate() const;
};

using ConfusionMatrix = std::array<std::array<std::size_t, kLetterCount>, kLetterCount>;  // [true][pred]

struct CharReport {
  std::vector<double> train_loss;  // per epoch
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  std::size_t test_count = 0;
  ConfusionMatrix confusion{};
};

struct CharnetRun {
  nn::Model model;
  nn::Adam optimizer;
  CharReport report;
};

/// Mini-batch Adam on categorical cross-entropy. Throws InvalidArgument when
/// fewer than two classes are present, NonFiniteLoss.
CharnetRun train_charnet(const CharDataset& ds, const nn::ModelConfig& model_cfg, const CharTrainConfig& cfg);

struct Prediction {
  int label = 0;
  double confidence = 0.0;
};

/// Argmax of the softmax output; ties go to the lowest index.
Prediction classify(const nn::Model& model, const Glyph& glyph);

CharReport evaluate_charnet(const nn::Model& model, const std::vector<CharSample>& samples);

struct Annotation {
  std::size_t index = 0;  // 1-based reading order
  BoundingBox box;
  char letter = 0;
  double confidence = 0.0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct OcrResult {
  std::string text;
  std::vector<Annotation> annotations;

  friend bool operator==(const OcrResult&, const OcrResult&) = default;
};

OcrResult recognize_page(const BinaryRaster& page, const nn::Model& model, const SegmenterConfig& seg_cfg,
                         const LayoutConfig& layout_cfg);

/// Ink black on white, 1-px green box outlines, red "letter index" labels
/// above each box. Throws BoxOutsidePage.
RgbImage annotate(const BinaryRaster& page, const OcrResult& result);

/// {text, annotations:[{index, box:[x0,y0,x1,y1], letter, confidence}]}
std::string ocr_result_json(const OcrResult& result);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// Whitespace-stripped, max(0, (N - distance) / N) with N the stripped
/// reference length. Throws EmptyReference.
double char_accuracy(std::string_view reference, std::string_view hypothesis);

}  // namespace glyphforge
