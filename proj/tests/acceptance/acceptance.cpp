// Acceptance suite. Prints one "criterion N: PASS|FAIL ..." line per
// criterion and exits nonzero if any fails.
//
// usage: acceptance <path to glyphforge CLI> [criterion numbers...]

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "glyphforge/detect.hpp"
#include "glyphforge/error.hpp"
#include "glyphforge/image_io.hpp"
#include "glyphforge/label_store.hpp"
#include "glyphforge/layout.hpp"
#include "glyphforge/metrics.hpp"
#include "glyphforge/nn/gradcheck.hpp"
#include "glyphforge/nn/model.hpp"
#include "glyphforge/ocr.hpp"
#include "glyphforge/rng.hpp"
#include "glyphforge/segmenter.hpp"
#include "glyphforge/synth.hpp"
#include "glyphforge/workbench.hpp"
#include "support/oracles.hpp"

using namespace glyphforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kAucTolerance = 1e-12;
constexpr double kBoxRecall = 0.95;
constexpr double kBoxIou = 0.8;
constexpr double kSegmentSeconds = 120.0;
constexpr double kDetectorAccuracy = 0.9;
constexpr std::size_t kDetectorEpochs = 10;
constexpr double kDetectorSeconds = 600.0;
constexpr double kCharnetAccuracy = 0.9;
constexpr double kPageAccuracy = 0.85;

std::string g_cli;
fs::path g_work;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& s) {
    if (!pass) return;
    if (!detail.empty()) detail += ", ";
    detail += s;
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  auto dir = g_work / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Jittered pages with fused letters and displaced dots.
SyntheticSpec noisy_spec() {
  SyntheticSpec spec;
  spec.scale_noise = 0.1;
  spec.jitter_x = 1;
  spec.jitter_y = 2;
  spec.fuse_probability = 0.15;
  spec.dot_offset = 3;
  return spec;
}

double best_iou(const BoundingBox& b, const std::vector<BoundingBox>& pool, std::size_t* at = nullptr) {
  double best = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double v = iou(b, pool[i]);
    if (v > best) {
      best = v;
      if (at) *at = i;
    }
  }
  return best;
}

bool contains(const BoundingBox& outer, const BoundingBox& inner) {
  return outer.x_min <= inner.x_min && outer.y_min <= inner.y_min && outer.x_max >= inner.x_max &&
         outer.y_max >= inner.y_max;
}

// --- subprocess helpers ----------------------------------------------------

int run_cli(const std::vector<std::string>& args, const fs::path& log) {
  const pid_t pid = fork();
  if (pid < 0) return -1;
  if (pid == 0) {
    const int fd = open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      dup2(fd, STDOUT_FILENO);
      dup2(fd, STDERR_FILENO);
    }
    std::vector<char*> argv{const_cast<char*>(g_cli.c_str())};
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execv(g_cli.c_str(), argv.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Server {
  pid_t pid = -1;
  int port = 0;
};

// Starts label-serve on an ephemeral port and waits for its banner.
Server start_server(const std::vector<std::string>& args) {
  int pipefd[2];
  if (pipe(pipefd) != 0) throw std::runtime_error("pipe failed");
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    close(pipefd[0]);
    dup2(pipefd[1], STDOUT_FILENO);
    std::vector<std::string> full{"label-serve", "--host", "127.0.0.1", "--port", "0"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<char*> argv{const_cast<char*>(g_cli.c_str())};
    for (const auto& a : full) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execv(g_cli.c_str(), argv.data());
    _exit(127);
  }
  close(pipefd[1]);
  std::string line;
  char c = 0;
  while (read(pipefd[0], &c, 1) == 1 && c != '\n') line += c;
  close(pipefd[0]);
  const auto colon = line.rfind(':');
  if (line.rfind("listening on ", 0) != 0 || colon == std::string::npos) {
    kill(pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    throw std::runtime_error("label-serve did not start: '" + line + "'");
  }
  return {pid, std::stoi(line.substr(colon + 1))};
}

void kill_server(Server& s, int sig) {
  if (s.pid <= 0) return;
  kill(s.pid, sig);
  waitpid(s.pid, nullptr, 0);
  s.pid = -1;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

// --- criteria ----------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<nn::ModelConfig> cfgs{
      {{5, 5, 2}, {nn::LayerSpec::conv2d(3)}, 1},  {{6, 5, 2}, {nn::LayerSpec::maxpool()}, 1},
      {{10}, {nn::LayerSpec::relu()}, 1},          {{3, 3, 2}, {nn::LayerSpec::flatten()}, 1},
      {{6}, {nn::LayerSpec::dense(4)}, 4},         {{10}, {nn::LayerSpec::dropout(0.5)}, 1},
      {{1}, {nn::LayerSpec::sigmoid()}, 1},        {{7}, {nn::LayerSpec::softmax()}, 7},
  };
  nn::GradCheckOptions opts;
  opts.epsilon = 1e-3;
  opts.tolerance = kGradTolerance;
  double worst = 0.0;
  for (const auto& cfg : cfgs) {
    const auto r = nn::grad_check(cfg, 21, opts);
    worst = std::max(worst, r.max_relative_error);
    if (r.checked == 0 || r.max_relative_error >= kGradTolerance) {
      o.fail(nn::to_string(cfg.layers[0].kind) + " error " + fmt(r.max_relative_error) + " at " + r.worst);
    }
  }
  const auto toy = nn::grad_check(nn::toy_charnet(), 2024, opts);
  if (toy.max_relative_error >= kGradTolerance) o.fail("toy charnet error " + fmt(toy.max_relative_error) + " at " + toy.worst);
  const double secs = seconds_since(t0);
  if (secs >= kGradSeconds) o.fail("took " + fmt(secs) + " s");
  o.note("8 layer kinds max rel err " + fmt(worst) + ", toy charnet " + fmt(toy.max_relative_error) + " over " +
         std::to_string(toy.checked) + " values, " + fmt(secs, 3) + " s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto cfg = nn::ModelConfig::detector(224);
  const auto shapes = nn::infer_shapes(cfg);
  std::size_t s = 224;
  std::size_t convs = 0;
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const auto kind = cfg.layers[i].kind;
    if (kind == nn::LayerKind::Conv2D) {
      s -= 2;
      ++convs;
      if (shapes[i + 1] != nn::Shape{s, s, cfg.layers[i].units}) o.fail("conv " + std::to_string(convs) + " shape");
    } else if (kind == nn::LayerKind::MaxPool2) {
      s /= 2;
      if (shapes[i + 1][0] != s || shapes[i + 1][1] != s) o.fail("pool shape after conv " + std::to_string(convs));
    } else if (kind == nn::LayerKind::Flatten) {
      if (shapes[i] != nn::Shape{26, 26, 128}) o.fail("trunk output is not 26x26x128");
      if (shapes[i + 1] != nn::Shape{s * s * 128} || shapes[i + 1] != nn::Shape{86528}) o.fail("flatten size");
    }
  }
  if (convs != 3) o.fail("expected 3 convolutions");
  o.note("trunk 26x26x128, flatten 86528");
  return o;
}

Outcome criterion3() {
  Outcome o;
  Rng rng(303);
  double worst_auc = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = uniform_int(rng, 2, 200);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = trial % 2 ? uniform01(rng) : uniform_int(rng, 0, 6) / 6.0;
      y[i] = bernoulli(rng, 0.45) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    worst_auc = std::max(worst_auc, std::abs(auc(s, y) - oracle::auc_pairs(s, y)));

    Confusion c;
    for (int i = 0; i < n; ++i) {
      const bool pos = s[i] >= kDecisionThreshold;
      if (pos && y[i]) ++c.tp;
      if (pos && !y[i]) ++c.fp;
      if (!pos && !y[i]) ++c.tn;
      if (!pos && y[i]) ++c.fn;
    }
    const auto m = binary_metrics(s, y);
    const double acc = static_cast<double>(c.tp + c.tn) / n;
    bool ok = m.confusion == c && m.accuracy == acc;
    ok &= m.precision_defined == (c.tp + c.fp > 0) && m.recall_defined == (c.tp + c.fn > 0);
    if (c.tp + c.fp > 0) ok &= m.precision == static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) ok &= m.recall == static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (!ok) o.fail("confusion metrics differ in trial " + std::to_string(trial));
  }
  if (worst_auc > kAucTolerance) o.fail("auc off by " + fmt(worst_auc));

  std::size_t mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    auto random_string = [&] {
      std::string s(static_cast<std::size_t>(uniform_int(rng, 1, 24)), 'a');
      for (auto& ch : s) ch = static_cast<char>('a' + uniform_int(rng, 0, 4));
      return s;
    };
    const auto a = random_string();
    const auto b = random_string();
    const double n = static_cast<double>(a.size());
    const double want = std::max(0.0, (n - static_cast<double>(oracle::edit_distance(a, b))) / n);
    if (char_accuracy(a, b) != want) ++mismatches;
  }
  if (mismatches) o.fail(std::to_string(mismatches) + "/100 char_accuracy mismatches");
  o.note("auc max diff " + fmt(worst_auc) + " on 50 cases, char_accuracy 100/100 exact, confusion metrics exact");
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto spec = noisy_spec();
  std::size_t truth = 0, recovered = 0, fused = 0, fused_ok = 0, dots = 0, dots_ok = 0;
  for (std::size_t k = 0; k < 50; ++k) {
    Rng rng(mix_seed(404, k));
    const auto page = render_page(spec, rng);
    const auto boxes = segment_boxes(page.page, SegmenterConfig{});
    for (const auto& g : page.glyphs) {
      ++truth;
      if (best_iou(g.box, boxes) >= kBoxIou) ++recovered;
    }
    for (const auto& f : page.fused) {
      ++fused;
      const auto& a = page.glyphs[f.first].box;
      const auto& b = page.glyphs[f.second].box;
      const BoundingBox pair{std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
                             std::max(a.y_max, b.y_max)};
      std::size_t inside = 0;
      for (const auto& bx : boxes) {
        const int cx2 = bx.x_min + bx.x_max, cy2 = bx.y_min + bx.y_max;
        if (cx2 >= 2 * pair.x_min && cx2 <= 2 * pair.x_max && cy2 >= 2 * pair.y_min && cy2 <= 2 * pair.y_max) ++inside;
      }
      if (inside == 2 && best_iou(a, boxes) >= kBoxIou && best_iou(b, boxes) >= kBoxIou) ++fused_ok;
    }
    for (const auto& d : page.dots) {
      ++dots;
      std::size_t at = boxes.size();
      for (std::size_t i = 0; i < boxes.size(); ++i)
        if (contains(boxes[i], d.dot)) at = i;
      if (at == boxes.size()) continue;
      std::size_t owner = 0;
      std::vector<BoundingBox> truth_boxes;
      for (const auto& g : page.glyphs) truth_boxes.push_back(g.box);
      if (best_iou(boxes[at], truth_boxes, &owner) >= kBoxIou && owner == d.glyph) ++dots_ok;
    }
  }
  const double secs = seconds_since(t0);
  const double recall = static_cast<double>(recovered) / static_cast<double>(truth);
  if (recall < kBoxRecall) o.fail("recovered " + fmt(recall) + " of truth boxes");
  if (fused == 0 || fused_ok != fused) o.fail(std::to_string(fused_ok) + "/" + std::to_string(fused) + " fused pairs split in 2");
  if (dots == 0 || dots_ok != dots) o.fail(std::to_string(dots_ok) + "/" + std::to_string(dots) + " dots merged with their stem");
  if (secs >= kSegmentSeconds) o.fail("took " + fmt(secs) + " s");
  o.note(std::to_string(recovered) + "/" + std::to_string(truth) + " boxes at IoU>=0.8 (" + fmt(recall) + "), " +
         std::to_string(fused_ok) + "/" + std::to_string(fused) + " fused pairs, " + std::to_string(dots_ok) + "/" +
         std::to_string(dots) + " dots, " + fmt(secs, 3) + " s");
  return o;
}

Outcome criterion5() {
  Outcome o;
  // Rendered pages: whitespace skeleton of the reading order vs the generator.
  SyntheticSpec spec;
  spec.scale_noise = 0.1;
  spec.jitter_x = 1;
  spec.jitter_y = 2;
  spec.dot_offset = 2;
  std::size_t agree = 0;
  const std::size_t pages = 50;
  for (std::size_t k = 0; k < pages; ++k) {
    Rng rng(mix_seed(505, k));
    const auto page = render_page(spec, rng);
    const auto boxes = segment_boxes(page.page, SegmenterConfig{});
    std::string got;
    for (const auto& t : linearize(boxes, LayoutConfig{})) {
      got += t.kind == Token::Kind::Glyph ? 'x' : t.kind == Token::Kind::Space ? ' ' : '\n';
    }
    std::string want = page.text;
    for (auto& ch : want)
      if (ch != ' ' && ch != '\n') ch = 'x';
    if (got == want) ++agree;
  }
  if (agree != pages) o.fail(std::to_string(agree) + "/" + std::to_string(pages) + " pages with matching spaces and newlines");

  // Random 8-box instances against the exhaustive partition oracle.
  Rng rng(5050);
  const LayoutConfig cfg;
  std::size_t cases = 0, matched = 0;
  for (int trial = 0; trial < 250; ++trial) {
    std::vector<BoundingBox> boxes;
    for (int i = 0; i < 8; ++i) {
      const int x = uniform_int(rng, 0, 120), y = uniform_int(rng, 0, 80);
      boxes.push_back({x, y, x + uniform_int(rng, 2, 12), y + uniform_int(rng, 4, 14)});
    }
    const int mh = uniform_int(rng, 3, 12);
    const int mw = uniform_int(rng, 3, 12);
    ++cases;
    const auto parts = oracle::row_partitions(boxes, cfg.row_factor * mh);
    if (parts.size() != 1) continue;
    TokenStream want;
    for (const auto& row : parts.front()) {
      if (!want.empty()) want.push_back(Token::newline());
      std::vector<std::size_t> ordered(row.begin(), row.end());
      std::sort(ordered.begin(), ordered.end(), [&](auto a, auto b) {
        return std::tie(boxes[a].x_min, boxes[a].y_min, a) < std::tie(boxes[b].x_min, boxes[b].y_min, b);
      });
      for (std::size_t j = 0; j < ordered.size(); ++j) {
        if (j > 0 && boxes[ordered[j]].x_min - boxes[ordered[j - 1]].x_max - 1 > cfg.gap_factor * mw) {
          want.push_back(Token::space());
        }
        want.push_back(Token::glyph(ordered[j]));
      }
    }
    const auto got = linearize(boxes, mw, mh, cfg);
    bool same = got.size() == want.size();
    for (std::size_t j = 0; same && j < got.size(); ++j) {
      same = got[j].kind == want[j].kind;
      // exact (x_min, y_min) duplicates may legitimately swap
      if (same && got[j].kind == Token::Kind::Glyph) {
        same = boxes[got[j].index].x_min == boxes[want[j].index].x_min &&
               boxes[got[j].index].y_min == boxes[want[j].index].y_min;
      }
    }
    if (same) ++matched;
  }
  if (matched != cases) o.fail(std::to_string(matched) + "/" + std::to_string(cases) + " oracle cases matched");
  o.note(std::to_string(agree) + "/" + std::to_string(pages) + " rendered pages, " + std::to_string(matched) + "/" +
         std::to_string(cases) + " 8-box oracle cases");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto root = fresh_dir("c6_screening");
  gen_screening_corpus(root, 100, 64, 606);
  const auto index = scan_dataset(root);
  TrainConfig cfg;
  cfg.image_size = 64;
  cfg.max_epochs = kDetectorEpochs;
  cfg.seed = 606;
  const auto split = split_dataset(index, cfg);
  const auto val = load_samples(split.val, cfg.image_size);
  const auto run = train_detector(index, nn::ModelConfig::detector(64), cfg);
  const auto restored = evaluate(run.model, val);
  double best_acc = 0.0;
  for (const auto& r : run.history) best_acc = std::max(best_acc, r.val.accuracy);
  if (index.entries.size() != 200) o.fail("corpus has " + std::to_string(index.entries.size()) + " images");
  if (run.history.size() > kDetectorEpochs) o.fail("ran " + std::to_string(run.history.size()) + " epochs");
  if (restored.accuracy < kDetectorAccuracy) o.fail("restored model val accuracy " + fmt(restored.accuracy));
  const auto& best = run.history.at(run.best_epoch - 1);
  if (restored.loss != best.val.loss) o.fail("restored loss differs from best epoch");
  const double train_secs = seconds_since(t0);

  // Constructed degrading schedule: descend for one epoch, then ascend.
  std::vector<DatasetEntry> subset;
  std::size_t per_class[2] = {0, 0};
  for (const auto& e : split.train)
    if (per_class[e.label]++ < 24) subset.push_back(e);
  const auto small_train = load_samples(subset, 32);
  const auto small_val = load_samples(split.val, 32);
  TrainConfig dcfg;
  dcfg.image_size = 32;
  dcfg.batch_size = 8;
  dcfg.seed = 607;
  TrainHooks hooks;
  hooks.lr_schedule = [](std::size_t epoch, double lr) { return epoch == 1 ? lr : -lr; };
  const auto degrade = train_binary(small_train, small_val, nn::ModelConfig::detector(32), dcfg, hooks);
  bool rising = degrade.history.size() == 4;
  for (std::size_t k = 1; rising && k < degrade.history.size(); ++k)
    rising = degrade.history[k].val.loss > degrade.history[0].val.loss;
  if (!rising) o.fail("degrading schedule did not stop after 4 epochs with epoch 1 best: " + history_csv(degrade.history));
  if (degrade.best_epoch != 1) o.fail("best epoch " + std::to_string(degrade.best_epoch) + " instead of 1");
  if (evaluate(degrade.model, small_val).loss != degrade.history[0].val.loss) o.fail("weights of epoch 1 not restored");

  const double secs = seconds_since(t0);
  if (secs >= kDetectorSeconds) o.fail("took " + fmt(secs) + " s");
  o.note("restored epoch " + std::to_string(run.best_epoch) + "/" + std::to_string(run.history.size()) +
         " val acc " + fmt(restored.accuracy) + " (best seen " + fmt(best_acc) + "), training " + fmt(train_secs, 3) +
         " s; degrading run stopped at " + std::to_string(degrade.history.size()) + " with epoch " +
         std::to_string(degrade.best_epoch) + " restored, " + fmt(secs, 3) + " s total");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto t0 = Clock::now();
  SyntheticSpec letters;
  letters.scale_noise = 0.15;
  const SegmenterConfig seg;
  CharDatasetConfig dc;
  dc.seed = 707;
  dc.segmenter = seg;
  const auto ds = make_char_dataset(synthetic_glyphs(40, letters, seg, 707), dc);
  CharTrainConfig tc;
  tc.epochs = 4;
  tc.batch_size = 32;
  tc.adam.learning_rate = 1e-3;
  tc.seed = 707;
  const auto run = train_charnet(ds, nn::ModelConfig::charnet(seg.glyph_size, kLetterCount), tc);
  if (ds.samples.size() != 26 * 40) o.fail("dataset has " + std::to_string(ds.samples.size()) + " glyphs");
  if (run.report.test_accuracy < kCharnetAccuracy) o.fail("test top-1 " + fmt(run.report.test_accuracy));

  SyntheticSpec spec;
  spec.scale_noise = 0.1;
  spec.jitter_x = 1;
  spec.jitter_y = 2;
  spec.fuse_probability = 0.15;
  spec.dot_offset = 3;
  double acc_sum = 0.0;
  const std::size_t pages = 10;
  bool indices_ok = true;
  for (std::size_t k = 0; k < pages; ++k) {
    Rng rng(mix_seed(7070, k));
    const auto page = render_page(spec, rng);
    const auto result = recognize_page(page.page, run.model, seg, LayoutConfig{});
    acc_sum += char_accuracy(page.text, result.text);
    // reading order: annotations follow the glyph tokens of linearize
    const auto boxes = segment_boxes(page.page, seg);
    std::vector<BoundingBox> order;
    for (const auto& t : linearize(boxes, LayoutConfig{}))
      if (t.kind == Token::Kind::Glyph) order.push_back(boxes[t.index]);
    indices_ok &= result.annotations.size() == order.size();
    for (std::size_t i = 0; indices_ok && i < result.annotations.size(); ++i) {
      indices_ok = result.annotations[i].index == i + 1 && result.annotations[i].box == order[i];
    }
  }
  const double page_acc = acc_sum / static_cast<double>(pages);
  if (page_acc < kPageAccuracy) o.fail("page char_accuracy " + fmt(page_acc));
  if (!indices_ok) o.fail("annotation indices are not 1..N in reading order");
  o.note("test top-1 " + fmt(run.report.test_accuracy) + " on " + std::to_string(run.report.test_count) +
         " glyphs, page char_accuracy " + fmt(page_acc) + " over " + std::to_string(pages) + " pages, indices 1..N, " +
         fmt(seconds_since(t0), 3) + " s");
  return o;
}

// Writes a label store over the first corpus page, naming each proposal after
// its ground-truth glyph.
void seed_store(const fs::path& pages_dir, const fs::path& store_path, std::size_t count) {
  PageLibrary pages(pages_dir);
  LabelStore store(store_path, [] { return std::string("2026-01-01T00:00:00Z"); });
  LabelSession session(pages, store, SegmenterConfig{}, g_work / "unused_export");
  const auto id = pages.ids().front();
  const auto truth = json::parse(std::ifstream(pages_dir / (id + ".json")));
  std::vector<BoundingBox> truth_boxes;
  std::string chars;
  for (const auto& g : truth["glyphs"]) {
    truth_boxes.push_back({g["box"][0], g["box"][1], g["box"][2], g["box"][3]});
    chars += g["char"].get<std::string>();
  }
  const auto boxes = session.boxes(id);
  for (std::size_t i = 0; i < std::min(count, boxes.size()); ++i) {
    std::size_t at = 0;
    best_iou(boxes[i].box, truth_boxes, &at);
    session.label(id, boxes[i].box, chars[at], "acceptance");
  }
}

Outcome criterion8() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::string seed = "808";
  std::vector<std::string> checked;
  std::map<std::string, std::string> first_outputs;

  auto run_twice = [&](const std::string& name, const std::function<std::vector<std::string>(const fs::path&)>& args,
                       const std::function<void(const fs::path&)>& prepare = {}) {
    std::map<std::string, std::string> trees[2];
    for (int r = 0; r < 2; ++r) {
      const auto dir = fresh_dir("c8/" + name + "/run" + std::to_string(r));
      if (prepare) prepare(dir);
      std::vector<std::string> full{"--seed", seed};
      const auto rest = args(dir);
      full.insert(full.end(), rest.begin(), rest.end());
      const int rc = run_cli(full, dir.parent_path() / ("log" + std::to_string(r) + ".txt"));
      if (rc != 0) {
        o.fail(name + " exited " + std::to_string(rc));
        return;
      }
      trees[r] = read_tree(dir / "out");
    }
    if (trees[0].empty()) {
      o.fail(name + " wrote no files");
    } else if (trees[0] != trees[1]) {
      std::string which;
      for (const auto& [k, v] : trees[0])
        if (!trees[1].count(k) || trees[1].at(k) != v) which += " " + k;
      o.fail(name + " differs:" + which);
    }
    checked.push_back(name + "(" + std::to_string(trees[0].size()) + ")");
  };

  const auto pages_dir = fresh_dir("c8_inputs/pages");
  const auto screening = fresh_dir("c8_inputs/screening");
  gen_corpus(pages_dir, noisy_spec(), 3, 8080);
  gen_screening_corpus(screening, 12, 32, 8081);
  const auto page0 = pages_dir / "page_0000.png";
  const auto store_path = g_work / "c8_inputs" / "labels.jsonl";
  fs::remove(store_path);
  seed_store(pages_dir, store_path, 12);

  run_twice("gen-corpus pages", [&](const fs::path& d) {
    return std::vector<std::string>{"gen-corpus", "--out", (d / "out").string(), "--pages", "3", "--fuse", "0.15",
                                    "--dot-offset", "3", "--jitter-x", "1", "--jitter-y", "2", "--scale-noise", "0.1"};
  });
  run_twice("gen-corpus screening", [&](const fs::path& d) {
    return std::vector<std::string>{"gen-corpus", "--kind", "screening", "--out", (d / "out").string(), "--per-class",
                                    "6", "--size", "48"};
  });
  run_twice("segment", [&](const fs::path& d) {
    return std::vector<std::string>{"segment", "--page", page0.string(), "--out", (d / "out" / "boxes.json").string()};
  });
  run_twice("detect-train", [&](const fs::path& d) {
    return std::vector<std::string>{"detect-train", "--data", screening.string(), "--out", (d / "out").string(),
                                    "--img-size", "32", "--epochs", "2"};
  });
  const auto det_model = g_work / "c8" / "detect-train" / "run0" / "out" / "detector.gfckpt";
  run_twice("detect-eval", [&](const fs::path& d) {
    return std::vector<std::string>{"detect-eval", "--data", screening.string(), "--model", det_model.string(), "--out",
                                    (d / "out" / "metrics.json").string()};
  });
  run_twice("ocr-train", [&](const fs::path& d) {
    return std::vector<std::string>{"ocr-train", "--synthetic", "4", "--epochs", "1", "--out", (d / "out").string()};
  });
  const auto char_model = g_work / "c8" / "ocr-train" / "run0" / "out" / "charnet.gfckpt";
  run_twice("ocr-run", [&](const fs::path& d) {
    return std::vector<std::string>{"ocr-run", "--page", page0.string(), "--model", char_model.string(), "--out",
                                    (d / "out").string()};
  });
  run_twice("dataset-export", [&](const fs::path& d) {
    return std::vector<std::string>{"dataset-export", "--pages", pages_dir.string(), "--store", store_path.string(),
                                    "--out", (d / "out").string()};
  });
  run_twice("ocr-train glyphs", [&](const fs::path& d) {
    return std::vector<std::string>{"ocr-train", "--glyphs",
                                    (g_work / "c8" / "dataset-export" / "run0" / "out").string(), "--epochs", "1",
                                    "--out", (d / "out").string()};
  });

  // label-serve: the same HTTP session against a fresh store, then export.
  std::map<std::string, std::string> serve_trees[2];
  try {
    for (int r = 0; r < 2; ++r) {
      const auto dir = fresh_dir("c8/label-serve/run" + std::to_string(r));
      auto server = start_server({"--seed", seed, "--pages", pages_dir.string(), "--store",
                                  (dir / "labels.jsonl").string(), "--export", (dir / "out").string()});
      httplib::Client cli("127.0.0.1", server.port);
      const auto boxes = cli.Get("/api/pages/page_0000/boxes");
      bool ok = boxes && boxes->status == 200;
      if (ok) {
        const auto list = json::parse(boxes->body);
        for (std::size_t i = 0; ok && i < std::min<std::size_t>(5, list.size()); ++i) {
          const json body{{"page", "page_0000"}, {"box", list[i]["box"]}, {"letter", std::string(1, 'a' + i)}};
          const auto res = cli.Post("/api/labels", body.dump(), "application/json");
          ok = res && res->status == 201;
        }
        const auto exp = cli.Get("/api/export");
        ok = ok && exp && exp->status == 200;
      }
      kill_server(server, SIGTERM);
      if (!ok) o.fail("label-serve session failed");
      serve_trees[r] = read_tree(dir / "out");
    }
    if (serve_trees[0].empty() || serve_trees[0] != serve_trees[1]) o.fail("label-serve export differs");
    checked.push_back("label-serve(" + std::to_string(serve_trees[0].size()) + ")");
  } catch (const std::exception& e) {
    o.fail(std::string("label-serve: ") + e.what());
  }

  std::string list;
  for (const auto& c : checked) list += (list.empty() ? "" : " ") + c;
  o.note("identical outputs for " + list + ", " + fmt(seconds_since(t0), 3) + " s");
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto dir = fresh_dir("c9");
  const auto pages_dir = dir / "pages";
  gen_corpus(pages_dir, SyntheticSpec{}, 1, 909);
  const auto store_path = dir / "labels.jsonl";
  const auto export_dir = dir / "export";
  const std::vector<std::string> args{"--pages", pages_dir.string(), "--store", store_path.string(), "--export",
                                      export_dir.string()};
  std::vector<json> sent;
  try {
    for (int phase = 0; phase < 2; ++phase) {
      auto server = start_server(args);
      httplib::Client cli("127.0.0.1", server.port);
      const auto boxes = cli.Get("/api/pages/page_0000/boxes");
      if (!boxes || boxes->status != 200) {
        kill_server(server, SIGKILL);
        o.fail("boxes request failed in phase " + std::to_string(phase + 1));
        return o;
      }
      const auto list = json::parse(boxes->body);
      const json body{{"page", "page_0000"}, {"box", list.at(phase)["box"]}, {"letter", phase == 0 ? "q" : "z"}};
      const auto res = cli.Post("/api/labels", body.dump(), "application/json");
      if (!res || res->status != 201) {
        kill_server(server, SIGKILL);
        o.fail("label not acknowledged in phase " + std::to_string(phase + 1));
        return o;
      }
      sent.push_back(body);
      if (phase == 0) {
        kill_server(server, SIGKILL);  // no chance to flush or clean up
        continue;
      }
      const auto exp = cli.Get("/api/export");
      kill_server(server, SIGKILL);
      if (!exp || exp->status != 200) {
        o.fail("export failed after restart");
        return o;
      }
      const auto manifest = json::parse(exp->body);
      std::set<std::string> want, got;
      for (const auto& s : sent) want.insert(s["page"].get<std::string>() + s["box"].dump() + s["letter"].get<std::string>());
      for (const auto& e : manifest["entries"])
        got.insert(e["page"].get<std::string>() + e["box"].dump() + e["letter"].get<std::string>());
      if (manifest["count"] != 2 || got != want) o.fail("export after restart is " + manifest.dump());
      for (const auto& e : manifest["entries"]) {
        if (!fs::exists(export_dir / e["file"].get<std::string>())) o.fail("missing " + e["file"].get<std::string>());
      }
    }
    LabelStore replay(store_path);
    if (replay.size() != 2) o.fail("store holds " + std::to_string(replay.size()) + " records");
  } catch (const std::exception& e) {
    o.fail(e.what());
  }
  o.note("both acknowledged labels survive SIGKILL and restart, export lists exactly them");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <glyphforge CLI> [criteria...]\n";
    return 2;
  }
  g_cli = fs::absolute(argv[1]).string();
  g_work = fs::temp_directory_path() / ("glyphforge_acceptance_" + std::to_string(getpid()));
  fs::create_directories(g_work);
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::stoi(argv[i]));

  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    failed += !o.pass;
  }
  fs::remove_all(g_work);
  return failed == 0 ? 0 : 1;
}
