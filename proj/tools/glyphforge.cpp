#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "glyphforge/detect.hpp"
#include "glyphforge/error.hpp"
#include "glyphforge/image_io.hpp"
#include "glyphforge/label_store.hpp"
#include "glyphforge/layout.hpp"
#include "glyphforge/nn/checkpoint.hpp"
#include "glyphforge/ocr.hpp"
#include "glyphforge/segmenter.hpp"
#include "glyphforge/service.hpp"
#include "glyphforge/synth.hpp"
#include "glyphforge/workbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace glyphforge;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

json box_json(const BoundingBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

json metrics_json(const BinaryMetrics& m) {
  auto opt = [](bool defined, double v) { return defined ? json(v) : json(nullptr); };
  return {{"loss", m.loss},
          {"accuracy", m.accuracy},
          {"precision", opt(m.precision_defined, m.precision)},
          {"recall", opt(m.recall_defined, m.recall)},
          {"auc", opt(m.auc_defined, m.auc)},
          {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw Error(ErrorCode::IoError, what + " not found: " + p.string());
}

LabelServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glyphforge: dysgraphia screening and handwriting OCR toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--config", config_path, "Config file (default: $GLYPHFORGE_CONFIG)");
  app.add_option("--seed", seed_flag, "Seed for every random choice");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Render synthetic pages with ground truth, or a screening corpus");
  std::string gen_out;
  std::string gen_kind = "pages";
  std::size_t gen_pages = 10;
  std::size_t gen_per_class = 100;
  int gen_size = 128;
  SyntheticSpec spec;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--kind", gen_kind, "pages | screening")->check(CLI::IsMember({"pages", "screening"}));
  gen->add_option("--pages", gen_pages, "Number of pages");
  gen->add_option("--per-class", gen_per_class, "Screening samples per class");
  gen->add_option("--size", gen_size, "Screening sample size in pixels");
  gen->add_option("--scale", spec.scale, "Font scale");
  gen->add_option("--scale-noise", spec.scale_noise, "Per-glyph relative scale noise");
  gen->add_option("--jitter-x", spec.jitter_x, "Letter gap jitter in pixels");
  gen->add_option("--jitter-y", spec.jitter_y, "Baseline jitter in pixels");
  gen->add_option("--fuse", spec.fuse_probability, "Probability that adjacent letters touch");
  gen->add_option("--dot-offset", spec.dot_offset, "Lateral i/j dot offset range in pixels");
  gen->add_option("--lines", spec.lines, "Lines per page");
  gen->add_option("--words", spec.words_per_line, "Words per line");

  // segment
  auto* seg = app.add_subcommand("segment", "Segment a page into character boxes");
  std::string seg_page;
  std::string seg_out;
  seg->add_option("--page", seg_page, "Page image")->required();
  seg->add_option("--out", seg_out, "Output JSON (default: stdout)");

  // detect-train
  auto* dtrain = app.add_subcommand("detect-train", "Train the dysgraphia screening network");
  std::string dt_data;
  std::string dt_out;
  std::optional<int> dt_size;
  std::optional<std::size_t> dt_epochs;
  dtrain->add_option("--data", dt_data, "Dataset root with one folder per class")->required();
  dtrain->add_option("--out", dt_out, "Output directory")->required();
  dtrain->add_option("--img-size", dt_size, "Input size in pixels");
  dtrain->add_option("--epochs", dt_epochs, "Maximum epochs");

  // detect-eval
  auto* deval = app.add_subcommand("detect-eval", "Evaluate a screening network on a dataset");
  std::string de_data;
  std::string de_model;
  std::string de_out;
  deval->add_option("--data", de_data, "Dataset root with one folder per class")->required();
  deval->add_option("--model", de_model, "Checkpoint")->required();
  deval->add_option("--out", de_out, "Metrics JSON (default: stdout)");

  // ocr-train
  auto* otrain = app.add_subcommand("ocr-train", "Train the character recognizer");
  std::string ot_glyphs;
  std::size_t ot_synth = 0;
  std::string ot_out;
  std::optional<std::size_t> ot_epochs;
  otrain->add_option("--glyphs", ot_glyphs, "Exported glyph dataset directory");
  otrain->add_option("--synthetic", ot_synth, "Render this many synthetic glyphs per letter instead");
  otrain->add_option("--out", ot_out, "Output directory")->required();
  otrain->add_option("--epochs", ot_epochs, "Epochs");

  // ocr-run
  auto* orun = app.add_subcommand("ocr-run", "Recognize a page");
  std::string or_page;
  std::string or_model;
  std::string or_out;
  orun->add_option("--page", or_page, "Page image")->required();
  orun->add_option("--model", or_model, "Charnet checkpoint")->required();
  orun->add_option("--out", or_out, "Output directory for <page>.json and <page>.png")->required();

  // label-serve
  auto* serve = app.add_subcommand("label-serve", "Serve the labeling HTTP API");
  std::string sv_pages;
  std::string sv_store;
  std::string sv_export;
  std::string sv_host = "127.0.0.1";
  int sv_port = 8080;
  serve->add_option("--pages", sv_pages, "Pages directory");
  serve->add_option("--store", sv_store, "Label store file");
  serve->add_option("--export", sv_export, "Export directory");
  serve->add_option("--host", sv_host, "Bind address");
  serve->add_option("--port", sv_port, "Port, 0 picks a free one");

  // dataset-export
  auto* dexp = app.add_subcommand("dataset-export", "Write labeled glyphs and a manifest");
  std::string dx_pages;
  std::string dx_store;
  std::string dx_out;
  dexp->add_option("--pages", dx_pages, "Pages directory");
  dexp->add_option("--store", dx_store, "Label store file");
  dexp->add_option("--out", dx_out, "Export directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    WorkbenchConfig cfg = config_path.empty() ? config_from_env() : load_config(config_path);
    if (seed_flag) cfg.seed = *seed_flag;
    cfg.detect.seed = cfg.seed;

    if (*gen) {
      if (gen_kind == "screening") {
        gen_screening_corpus(gen_out, gen_per_class, gen_size, cfg.seed);
        std::cout << "wrote " << 2 * gen_per_class << " screening samples to " << gen_out << "\n";
      } else {
        gen_corpus(gen_out, spec, gen_pages, cfg.seed);
        std::cout << "wrote " << gen_pages << " pages to " << gen_out << "\n";
      }
    } else if (*seg) {
      require_exists(seg_page, "page");
      const auto page = load_page(seg_page, cfg.page);
      const auto boxes = segment_boxes(page, cfg.segmenter);
      json tokens = json::array();
      for (const auto& t : linearize(boxes, cfg.layout)) {
        if (t.kind == Token::Kind::Glyph) tokens.push_back(t.index);
        else tokens.push_back(t.kind == Token::Kind::Space ? " " : "\n");
      }
      json jb = json::array();
      for (const auto& b : boxes) jb.push_back(box_json(b));
      const auto out = json{{"width", page.width()}, {"height", page.height()}, {"boxes", jb}, {"tokens", tokens}}.dump(2) + "\n";
      if (seg_out.empty()) std::cout << out;
      else write_text(seg_out, out);
    } else if (*dtrain) {
      if (dt_size) cfg.detect.image_size = *dt_size;
      if (dt_epochs) cfg.detect.max_epochs = *dt_epochs;
      cfg.detect.validate();
      const auto index = scan_dataset(dt_data);
      TrainHooks hooks;
      hooks.on_epoch = [](const EpochRecord& r) {
        std::printf("epoch %zu train_loss %.4f val_loss %.4f val_acc %.4f\n", r.epoch, r.train.loss, r.val.loss,
                    r.val.accuracy);
        std::fflush(stdout);
      };
      const auto run = train_detector(index, nn::ModelConfig::detector(static_cast<std::size_t>(cfg.detect.image_size)),
                                      cfg.detect, hooks);
      fs::create_directories(dt_out);
      nn::save_checkpoint(fs::path(dt_out) / "detector.gfckpt", {run.model, run.optimizer, cfg.seed});
      write_history_csv(fs::path(dt_out) / "history.csv", run.history);
      const auto& best = run.history[run.best_epoch - 1];
      write_text(fs::path(dt_out) / "metrics.json",
                 json{{"best_epoch", run.best_epoch}, {"epochs_run", run.history.size()}, {"train", metrics_json(best.train)},
                      {"val", metrics_json(best.val)}}.dump(2) + "\n");
      std::printf("best epoch %zu val_acc %.4f\n", run.best_epoch, best.val.accuracy);
    } else if (*deval) {
      const auto ckpt = nn::load_checkpoint(de_model);
      const auto& shape = ckpt.model.config().input;
      const auto index = scan_dataset(de_data);
      const auto samples = load_samples(index.entries, static_cast<int>(shape[0]));
      const auto out = metrics_json(evaluate(ckpt.model, samples)).dump(2) + "\n";
      if (de_out.empty()) std::cout << out;
      else write_text(de_out, out);
    } else if (*otrain) {
      if (ot_glyphs.empty() == (ot_synth == 0)) {
        std::cerr << "ocr-train: give exactly one of --glyphs or --synthetic\n";
        return kExitUsage;
      }
      CharDatasetConfig dc;
      dc.seed = cfg.seed;
      dc.test_fraction = cfg.charnet.test_fraction;
      dc.segmenter = cfg.segmenter;
      dc.augment = cfg.augment;
      CharDataset ds;
      if (!ot_glyphs.empty()) {
        require_exists(ot_glyphs, "glyph dataset");
        ds = load_exported_dataset(ot_glyphs, dc);
      } else {
        SyntheticSpec letters;
        letters.scale_noise = 0.15;
        ds = make_char_dataset(synthetic_glyphs(ot_synth, letters, cfg.segmenter, mix_seed(cfg.seed, 0x61)), dc);
      }
      CharTrainConfig tc;
      tc.epochs = ot_epochs.value_or(cfg.charnet.epochs);
      tc.batch_size = cfg.charnet.batch_size;
      tc.adam.learning_rate = cfg.charnet.learning_rate;
      tc.seed = cfg.seed;
      const auto run = train_charnet(ds, nn::ModelConfig::charnet(static_cast<std::size_t>(cfg.segmenter.glyph_size)), tc);
      fs::create_directories(ot_out);
      nn::save_checkpoint(fs::path(ot_out) / "charnet.gfckpt", {run.model, run.optimizer, cfg.seed});
      json confusion = json::array();
      for (const auto& row : run.report.confusion) confusion.push_back(row);
      write_text(fs::path(ot_out) / "report.json",
                 json{{"train_loss", run.report.train_loss}, {"test_loss", run.report.test_loss},
                      {"test_accuracy", run.report.test_accuracy}, {"test_count", run.report.test_count},
                      {"confusion", confusion}}.dump(2) + "\n");
      std::printf("test accuracy %.4f on %zu glyphs\n", run.report.test_accuracy, run.report.test_count);
    } else if (*orun) {
      require_exists(or_page, "page");
      const auto ckpt = nn::load_checkpoint(or_model);
      const auto page = load_page(or_page, cfg.page);
      const auto result = recognize_page(page, ckpt.model, cfg.segmenter, cfg.layout);
      const auto stem = fs::path(or_page).stem().string();
      write_text(fs::path(or_out) / (stem + ".json"), ocr_result_json(result));
      write_png(fs::path(or_out) / (stem + ".png"), annotate(page, result));
      std::cout << result.text << "\n";
    } else if (*serve) {
      PageLibrary pages(sv_pages.empty() ? cfg.paths.pages : fs::path(sv_pages), cfg.page);
      LabelStore store(sv_store.empty() ? cfg.paths.store : fs::path(sv_store));
      LabelSession session(pages, store, cfg.segmenter, sv_export.empty() ? cfg.paths.export_dir : fs::path(sv_export));
      LabelServer server(session);
      const int port = server.bind(sv_host, sv_port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on http://%s:%d\n", sv_host.c_str(), port);
      std::fflush(stdout);
      const bool ok = server.run();
      g_server = nullptr;
      if (!ok) throw Error(ErrorCode::IoError, "server stopped unexpectedly");
    } else if (*dexp) {
      PageLibrary pages(dx_pages.empty() ? cfg.paths.pages : fs::path(dx_pages), cfg.page);
      const fs::path store_path = dx_store.empty() ? cfg.paths.store : fs::path(dx_store);
      require_exists(store_path, "label store");
      LabelStore store(store_path);
      const auto entries = export_dataset(store, pages, dx_out.empty() ? cfg.paths.export_dir : fs::path(dx_out), cfg.segmenter);
      std::cout << "exported " << entries.size() << " glyphs\n";
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
