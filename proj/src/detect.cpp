#include "glyphforge/detect.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "glyphforge/error.hpp"
#include "glyphforge/image_io.hpp"
#include "glyphforge/nn/loss.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> collect_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path());
  }
  return out;
}

}  // namespace

DatasetIndex scan_dataset(const fs::path& root, const std::array<std::string, 2>& class_names) {
  DatasetIndex index;
  index.class_names = class_names;
  std::sort(index.class_names.begin(), index.class_names.end());
  if (index.class_names[0] == index.class_names[1]) {
    throw Error(ErrorCode::InvalidArgument, "class names must differ");
  }
  for (int label = 0; label < 2; ++label) {
    const fs::path dir = root / index.class_names[label];
    if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingClassDir, "missing class folder " + dir.string());
    const auto files = collect_images(dir);
    if (files.empty()) throw Error(ErrorCode::EmptyClass, "no images in " + dir.string());
    for (const auto& f : files) index.entries.push_back({f, label});
  }
  std::sort(index.entries.begin(), index.entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.path.string() < b.path.string(); });
  return index;
}

void TrainConfig::validate() const {
  if (!(val_split > 0.0 && val_split < 1.0)) throw Error(ErrorCode::InvalidArgument, "val_split must be in (0, 1)");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (patience < 1) throw Error(ErrorCode::InvalidArgument, "patience must be >= 1");
  if (max_epochs < 1) throw Error(ErrorCode::InvalidArgument, "max_epochs must be >= 1");
  if (image_size < 8) throw Error(ErrorCode::InvalidArgument, "image_size must be >= 8");
}

DatasetSplit split_dataset(const DatasetIndex& index, const TrainConfig& cfg) {
  cfg.validate();
  DatasetSplit split;
  Rng rng(mix_seed(cfg.seed, 0x5917));
  for (int label = 0; label < 2; ++label) {
    std::vector<DatasetEntry> members;
    for (const auto& e : index.entries) {
      if (e.label == label) members.push_back(e);
    }
    if (members.size() < 2) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(label) + " needs at least 2 entries");
    }
    shuffle(members, rng);
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * cfg.val_split));
    split.val.insert(split.val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  return split;
}

nn::Tensor preprocess_raster(const Raster& img, int image_size) {
  const Raster scaled = resize(img, image_size, image_size);
  const auto n = static_cast<std::size_t>(image_size);
  nn::Tensor t({n, n, 1});
  const auto& px = scaled.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) t[i] = px[i] / 255.0;
  return t;
}

nn::Tensor preprocess_sample(const fs::path& path, int image_size) {
  return preprocess_raster(load_image(path), image_size);
}

std::vector<Sample> load_samples(const std::vector<DatasetEntry>& entries, int image_size) {
  std::vector<Sample> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back({preprocess_sample(e.path, image_size), e.label});
  return out;
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience < 1) throw Error(ErrorCode::InvalidArgument, "patience must be >= 1");
}

bool EarlyStopping::update(double val_loss) {
  ++epochs_;
  last_improved_ = epochs_ == 1 || val_loss < best_loss_;
  if (last_improved_) {
    best_loss_ = val_loss;
    best_epoch_ = epochs_;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

std::string history_csv(const History& history) {
  std::string out =
      "epoch,train_loss,train_acc,train_precision,train_recall,train_auc,"
      "val_loss,val_acc,val_precision,val_recall,val_auc\n";
  char buf[512];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.epoch, r.train.loss,
                  r.train.accuracy, r.train.precision, r.train.recall, r.train.auc, r.val.loss, r.val.accuracy,
                  r.val.precision, r.val.recall, r.val.auc);
    out += buf;
  }
  return out;
}

void write_history_csv(const fs::path& path, const History& history) {
  const auto text = history_csv(history);
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<double> predict(const nn::Model& model, const std::vector<Sample>& samples) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) scores.push_back(nn::forward(model, s.input, false, 0)[0]);
  return scores;
}

BinaryMetrics evaluate(const nn::Model& model, const std::vector<Sample>& samples) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(s.label);
  return binary_metrics(predict(model, samples), labels);
}

DetectorRun train_binary(const std::vector<Sample>& train, const std::vector<Sample>& val,
                         const nn::ModelConfig& model_cfg, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (train.empty() || val.empty()) throw Error(ErrorCode::EmptyInput, "train and validation sets must be nonempty");

  nn::Model model(model_cfg, mix_seed(cfg.seed, 0x1417));
  nn::Adam optimizer(cfg.adam, model.parameters());
  DetectorRun run{model, optimizer, {}, 0};
  EarlyStopping stopper(cfg.patience);
  Rng order_rng(mix_seed(cfg.seed, 0x0D3E));

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double lr = hooks.lr_schedule ? hooks.lr_schedule(epoch, cfg.adam.learning_rate) : cfg.adam.learning_rate;
    optimizer.set_learning_rate(lr);
    if (cfg.shuffle_train) shuffle(order, order_rng);

    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(train.size());
    labels.reserve(train.size());
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      auto grads = nn::zeros_like(model.parameters());
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = train[order[k]];
        nn::ForwardCache cache;
        const std::uint64_t dropout_seed = mix_seed(cfg.seed, epoch * 1000003ULL + k);
        const double p = nn::forward(model, s.input, true, dropout_seed, &cache)[0];
        const auto l = nn::binary_cross_entropy(p, s.label);
        if (!std::isfinite(l.loss) || !std::isfinite(l.grad)) {
          throw Error(ErrorCode::NonFiniteLoss, "non-finite training loss at epoch " + std::to_string(epoch));
        }
        nn::accumulate(grads, nn::backward(model, cache, nn::Tensor({1}, l.grad * scale)).params);
        scores.push_back(p);
        labels.push_back(s.label);
      }
      optimizer.step(model.mutable_parameters(), grads);
    }

    EpochRecord rec{epoch, binary_metrics(scores, labels), evaluate(model, val)};
    if (!std::isfinite(rec.val.loss) || !std::isfinite(rec.train.loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch));
    }
    run.history.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);

    const bool stop = stopper.update(rec.val.loss);
    if (stopper.last_improved()) {
      run.model = model;
      run.optimizer = optimizer;
      run.best_epoch = epoch;
    }
    if (stop) break;
  }
  return run;
}

DetectorRun train_detector(const DatasetIndex& index, const nn::ModelConfig& model_cfg, const TrainConfig& cfg,
                           const TrainHooks& hooks) {
  const auto split = split_dataset(index, cfg);
  return train_binary(load_samples(split.train, cfg.image_size), load_samples(split.val, cfg.image_size), model_cfg,
                      cfg, hooks);
}

}  // namespace glyphforge
