#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "glyphforge/metrics.hpp"
#include "glyphforge/nn/adam.hpp"
#include "glyphforge/nn/model.hpp"
#include "glyphforge/raster.hpp"

namespace glyphforge {

inline const std::array<std::string, 2> kDefaultClassNames{"low potential dysgraphia", "potential dysgraphia"};

struct DatasetEntry {
  std::filesystem::path path;
  int label = 0;

  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct DatasetIndex {
  std::vector<DatasetEntry> entries;  // sorted by path
  std::array<std::string, 2> class_names;  // index == label
};

/// Label 0 is the lexicographically smaller class name. Files with a
/// .png/.jpg/.jpeg extension (any case) are collected recursively.
/// Throws MissingClassDir or EmptyClass.
DatasetIndex scan_dataset(const std::filesystem::path& root,
                          const std::array<std::string, 2>& class_names = kDefaultClassNames);

struct TrainConfig {
  int image_size = 224;
  double val_split = 0.2;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 10;
  std::size_t patience = 3;
  bool shuffle_train = true;
  bool shuffle_val = false;
  std::uint64_t seed = 0;
  nn::AdamConfig adam;

  void validate() const;
};

struct DatasetSplit {
  std::vector<DatasetEntry> train;
  std::vector<DatasetEntry> val;
};

/// Per class: floor(count * val_split) entries go to validation, chosen by a
/// seeded shuffle. Throws ClassTooSmall when a class has fewer than 2 entries.
DatasetSplit split_dataset(const DatasetIndex& index, const TrainConfig& cfg);

/// Grayscale, bilinear resize to size x size, scaled to [0, 1].
nn::Tensor preprocess_raster(const Raster& img, int image_size);
nn::Tensor preprocess_sample(const std::filesystem::path& path, int image_size);

struct Sample {
  nn::Tensor input;
  int label = 0;
};

std::vector<Sample> load_samples(const std::vector<DatasetEntry>& entries, int image_size);

/// Tracks the best validation loss; a loss counts as an improvement only
/// when strictly lower than the best so far.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  /// Records the loss of the next epoch (1-based) and reports whether
  /// training should stop now.
  bool update(double val_loss);
  bool last_improved() const noexcept { return last_improved_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_loss_; }
  std::size_t epochs_seen() const noexcept { return epochs_; }

 private:
  std::size_t patience_;
  std::size_t epochs_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  double best_loss_ = 0.0;
  bool last_improved_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  BinaryMetrics train;
  BinaryMetrics val;
};

using History = std::vector<EpochRecord>;

std::string history_csv(const History& history);
void write_history_csv(const std::filesystem::path& path, const History& history);

struct TrainHooks {
  /// Learning rate for a 1-based epoch given the configured one.
  std::function<double(std::size_t epoch, double base_lr)> lr_schedule;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct DetectorRun {
  nn::Model model;  // weights from best_epoch
  nn::Adam optimizer;
  History history;
  std::size_t best_epoch = 0;
};

/// Seeded mini-batch Adam on binary cross-entropy with early stopping on
/// validation loss. Train metrics use the training-mode predictions made
/// during the epoch. Throws NonFiniteLoss.
DetectorRun train_binary(const std::vector<Sample>& train, const std::vector<Sample>& val,
                         const nn::ModelConfig& model_cfg, const TrainConfig& cfg, const TrainHooks& hooks = {});

DetectorRun train_detector(const DatasetIndex& index, const nn::ModelConfig& model_cfg, const TrainConfig& cfg,
                           const TrainHooks& hooks = {});

std::vector<double> predict(const nn::Model& model, const std::vector<Sample>& samples);
BinaryMetrics evaluate(const nn::Model& model, const std::vector<Sample>& samples);

}  // namespace glyphforge
