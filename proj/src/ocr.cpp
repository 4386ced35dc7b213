#include "glyphforge/ocr.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "json.hpp"

#include "glyphforge/error.hpp"
#include "glyphforge/font.hpp"
#include "glyphforge/nn/loss.hpp"

namespace glyphforge {

namespace {

double sample_bilinear(const BinaryRaster& img, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto px = [&](int xx, int yy) -> double {
    if (xx < 0 || yy < 0 || xx >= img.width() || yy >= img.height()) return 0.0;
    return img.at(xx, yy) ? 1.0 : 0.0;
  };
  return (1 - fx) * (1 - fy) * px(x0, y0) + fx * (1 - fy) * px(x0 + 1, y0) + (1 - fx) * fy * px(x0, y0 + 1) +
         fx * fy * px(x0 + 1, y0 + 1);
}

}  // namespace

void AugmentConfig::validate() const {
  if (rotate_probability < 0.0 || rotate_probability > 1.0 || blur_probability < 0.0 || blur_probability > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "augmentation probabilities must be in [0, 1]");
  }
  if (rotate_degrees < 0.0 || rotate_degrees > 180.0) {
    throw Error(ErrorCode::InvalidArgument, "rotate_degrees must be in [0, 180]");
  }
}

BinaryRaster rotate_glyph(const BinaryRaster& img, double degrees) {
  const int w = img.width();
  const int h = img.height();
  // Padded canvas large enough for any rotation, same centre parity.
  const int pad = static_cast<int>(std::ceil(std::max(w, h) * (std::numbers::sqrt2 - 1.0) / 2.0)) + 1;
  const int pw = w + 2 * pad;
  const int ph = h + 2 * pad;
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;

  BinaryRaster canvas(pw, ph);
  bool any = false;
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      const double dx = x - pad - cx;
      const double dy = y - pad - cy;
      const double sx = cx + c * dx + s * dy;
      const double sy = cy - s * dx + c * dy;
      if (sample_bilinear(img, sx, sy) >= 0.5) {
        canvas.set(x, y, true);
        any = true;
      }
    }
  }
  if (!any) return BinaryRaster(w, h);
  const BoundingBox window{pad, pad, pad + w - 1, pad + h - 1};
  const BoundingBox extent = ink_extent(canvas);
  if (extent.x_min >= window.x_min && extent.y_min >= window.y_min && extent.x_max <= window.x_max &&
      extent.y_max <= window.y_max) {
    return crop(canvas, window);
  }
  SegmenterConfig cfg;
  cfg.glyph_size = w;
  return normalize_glyph(canvas, extent, cfg).image;
}

BinaryRaster box_blur(const BinaryRaster& img) {
  BinaryRaster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      int sum = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          const int yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < img.width() && yy < img.height() && img.at(xx, yy)) ++sum;
        }
      }
      out.set(x, y, sum / 9.0 >= 0.5);
    }
  }
  return out;
}

Glyph augment(const Glyph& glyph, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  const bool rotate = uniform01(rng) < cfg.rotate_probability;
  const double angle = uniform(rng, -cfg.rotate_degrees, cfg.rotate_degrees);
  const bool blur = uniform01(rng) < cfg.blur_probability;
  Glyph out = glyph;
  if (rotate) out.image = rotate_glyph(out.image, angle);
  if (blur) {
    auto blurred = box_blur(out.image);
    // A blur that erases a thin glyph entirely is skipped.
    if (blurred.count() > 0) out.image = std::move(blurred);
  }
  return out;
}

std::string glyph_hash(const Glyph& glyph) {
  const auto& img = glyph.image;
  std::vector<std::uint8_t> bytes;
  const std::string header = std::to_string(img.width()) + "x" + std::to_string(img.height()) + ":";
  bytes.assign(header.begin(), header.end());
  bytes.insert(bytes.end(), img.bits().begin(), img.bits().end());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::StorageError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

int letter_index(char letter) { return letter >= 'a' && letter <= 'z' ? letter - 'a' : -1; }

CharDataset make_char_dataset(std::vector<CharSample> samples, const CharDatasetConfig& cfg) {
  if (samples.empty()) throw Error(ErrorCode::EmptyStore, "no labeled glyphs");
  if (cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "test_fraction must be in [0, 1)");
  }
  cfg.augment.validate();
  CharDataset ds;
  ds.seed = cfg.seed;
  ds.augment = cfg.augment;
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label < 0 || samples[i].label >= static_cast<int>(kLetterCount)) {
      throw Error(ErrorCode::UnknownLabel, "label out of range");
    }
    by_class[samples[i].label].push_back(i);
  }
  Rng rng(mix_seed(cfg.seed, 0xC5A7));
  for (auto& [label, idx] : by_class) {
    shuffle(idx, rng);
    const auto n_test = static_cast<std::size_t>(std::floor(cfg.test_fraction * static_cast<double>(idx.size())));
    ds.test.insert(ds.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    ds.train.insert(ds.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.test.begin(), ds.test.end());
  ds.samples = std::move(samples);
  return ds;
}

CharDataset build_char_dataset(const std::vector<LabeledBox>& records, const PageSource& pages,
                               const CharDatasetConfig& cfg) {
  if (records.empty()) throw Error(ErrorCode::EmptyStore, "label store is empty");
  std::map<std::string, BinaryRaster> cache;
  std::vector<CharSample> samples;
  samples.reserve(records.size());
  for (const auto& r : records) {
    const int label = letter_index(r.letter);
    if (label < 0) throw Error(ErrorCode::UnknownLabel, std::string("label '") + r.letter + "' is not a-z");
    auto it = cache.find(r.page_id);
    if (it == cache.end()) it = cache.emplace(r.page_id, pages(r.page_id)).first;
    Glyph g = normalize_glyph(it->second, r.box, cfg.segmenter, r.page_id);
    if (!r.hash.empty() && glyph_hash(g) != r.hash) {
      throw Error(ErrorCode::HashMismatch, "glyph hash mismatch on page " + r.page_id);
    }
    samples.push_back({std::move(g), label});
  }
  return make_char_dataset(std::move(samples), cfg);
}

std::vector<CharSample> training_epoch(const CharDataset& ds, std::size_t epoch) {
  Rng rng(mix_seed(ds.seed, 0xA0650000ULL + epoch));
  std::vector<CharSample> out;
  out.reserve(ds.train.size());
  for (auto i : ds.train) out.push_back({augment(ds.samples[i].glyph, ds.augment, rng), ds.samples[i].label});
  return out;
}

std::vector<CharSample> synthetic_glyphs(std::size_t per_letter, const SyntheticSpec& spec, const SegmenterConfig& seg,
                                         std::uint64_t seed) {
  std::vector<CharSample> out;
  out.reserve(per_letter * kLetterCount);
  for (std::size_t l = 0; l < kLetterCount; ++l) {
    for (std::size_t k = 0; k < per_letter; ++k) {
      Rng rng(mix_seed(seed, l * 1000003ULL + k));
      const char ch = static_cast<char>('a' + l);
      const auto page = render_letter(ch, spec, rng);
      out.push_back({normalize_glyph(page.page, page.glyphs.front().box, seg), static_cast<int>(l)});
    }
  }
  return out;
}

nn::Tensor glyph_tensor(const Glyph& glyph) {
  const auto& img = glyph.image;
  nn::Tensor t({static_cast<std::size_t>(img.height()), static_cast<std::size_t>(img.width()), 1});
  const auto bits = img.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) t[i] = bits[i];
  return t;
}

void CharTrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
}

Prediction classify(const nn::Model& model, const Glyph& glyph) {
  const auto probs = nn::forward(model, glyph_tensor(glyph), false, 0);
  Prediction p{0, probs[0]};
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > p.confidence) p = {static_cast<int>(i), probs[i]};
  }
  return p;
}

CharReport evaluate_charnet(const nn::Model& model, const std::vector<CharSample>& samples) {
  CharReport rep;
  rep.test_count = samples.size();
  if (samples.empty()) return rep;
  std::size_t correct = 0;
  double loss = 0.0;
  for (const auto& s : samples) {
    const auto probs = nn::forward(model, glyph_tensor(s.glyph), false, 0);
    loss += nn::categorical_cross_entropy(probs.data(), static_cast<std::size_t>(s.label)).loss;
    int best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
      if (probs[i] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    correct += best == s.label;
    if (best < static_cast<int>(kLetterCount)) ++rep.confusion[s.label][best];
  }
  rep.test_loss = loss / static_cast<double>(samples.size());
  rep.test_accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return rep;
}

CharnetRun train_charnet(const CharDataset& ds, const nn::ModelConfig& model_cfg, const CharTrainConfig& cfg) {
  cfg.validate();
  std::set<int> classes;
  for (auto i : ds.train) classes.insert(ds.samples[i].label);
  if (classes.size() < 2) throw Error(ErrorCode::InvalidArgument, "charnet training needs at least two classes");

  nn::Model model(model_cfg, mix_seed(cfg.seed, 0xC4A2));
  nn::Adam optimizer(cfg.adam, model.parameters());
  Rng order_rng(mix_seed(cfg.seed, 0x0D3F));
  std::vector<double> epoch_loss;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto train = training_epoch(ds, epoch);
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, order_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      auto grads = nn::zeros_like(model.parameters());
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = train[order[k]];
        nn::ForwardCache cache;
        const auto probs =
            nn::forward(model, glyph_tensor(s.glyph), true, mix_seed(cfg.seed, epoch * 1000003ULL + k), &cache);
        auto l = nn::categorical_cross_entropy(probs.data(), static_cast<std::size_t>(s.label));
        if (!std::isfinite(l.loss)) {
          throw Error(ErrorCode::NonFiniteLoss, "non-finite training loss at epoch " + std::to_string(epoch));
        }
        total += l.loss;
        for (auto& g : l.grad) g *= scale;
        nn::accumulate(grads, nn::backward(model, cache, nn::Tensor(probs.shape(), std::move(l.grad))).params);
      }
      optimizer.step(model.mutable_parameters(), grads);
    }
    epoch_loss.push_back(total / static_cast<double>(train.size()));
  }

  std::vector<CharSample> test;
  test.reserve(ds.test.size());
  for (auto i : ds.test) test.push_back(ds.samples[i]);
  CharnetRun run;
  run.report = evaluate_charnet(model, test);
  run.model = std::move(model);
  run.optimizer = std::move(optimizer);
  run.report.train_loss = std::move(epoch_loss);
  return run;
}

OcrResult recognize_page(const BinaryRaster& page, const nn::Model& model, const SegmenterConfig& seg_cfg,
                         const LayoutConfig& layout_cfg) {
  OcrResult res;
  const auto segments = segment_page(page, seg_cfg);
  if (segments.empty()) return res;
  std::vector<BoundingBox> boxes;
  boxes.reserve(segments.size());
  for (const auto& s : segments) boxes.push_back(s.box);
  for (const auto& t : linearize(boxes, layout_cfg)) {
    switch (t.kind) {
      case Token::Kind::Space:
        res.text += ' ';
        break;
      case Token::Kind::Newline:
        res.text += '\n';
        break;
      case Token::Kind::Glyph: {
        const auto p = classify(model, segments[t.index].glyph);
        const char letter = static_cast<char>('a' + p.label);
        res.text += letter;
        res.annotations.push_back({res.annotations.size() + 1, boxes[t.index], letter, p.confidence});
        break;
      }
    }
  }
  return res;
}

RgbImage annotate(const BinaryRaster& page, const OcrResult& result) {
  for (const auto& a : result.annotations) {
    if (!page.contains(a.box)) throw Error(ErrorCode::BoxOutsidePage, "annotation box outside the page");
  }
  RgbImage img(page.width(), page.height());
  for (int y = 0; y < page.height(); ++y) {
    for (int x = 0; x < page.width(); ++x) {
      const std::uint8_t v = page.at(x, y) ? 0 : 255;
      img.set(x, y, v, v, v);
    }
  }
  for (const auto& a : result.annotations) {
    const auto& b = a.box;
    for (int x = b.x_min; x <= b.x_max; ++x) {
      img.set(x, b.y_min, 0, 255, 0);
      img.set(x, b.y_max, 0, 255, 0);
    }
    for (int y = b.y_min; y <= b.y_max; ++y) {
      img.set(b.x_min, y, 0, 255, 0);
      img.set(b.x_max, y, 0, 255, 0);
    }
  }
  for (const auto& a : result.annotations) {
    const std::string label = std::string(1, a.letter) + " " + std::to_string(a.index);
    font::draw_text(img, a.box.x_min, a.box.y_min - font::kRows - 2, label, {255, 0, 0});
  }
  return img;
}

std::string ocr_result_json(const OcrResult& result) {
  using nlohmann::json;
  json anns = json::array();
  for (const auto& a : result.annotations) {
    anns.push_back({{"index", a.index},
                    {"box", json::array({a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max})},
                    {"letter", std::string(1, a.letter)},
                    {"confidence", a.confidence}});
  }
  return json{{"text", result.text}, {"annotations", anns}}.dump(2) + "\n";
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double char_accuracy(std::string_view reference, std::string_view hypothesis) {
  auto strip = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    }
    return out;
  };
  const auto ref = strip(reference);
  const auto hyp = strip(hypothesis);
  if (ref.empty()) throw Error(ErrorCode::EmptyReference, "reference has no characters");
  const double n = static_cast<double>(ref.size());
  return std::max(0.0, (n - static_cast<double>(levenshtein(ref, hyp))) / n);
}

}  // namespace glyphforge
