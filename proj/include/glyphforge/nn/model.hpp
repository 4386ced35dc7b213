#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glyphforge/nn/tensor.hpp"

namespace glyphforge::nn {

enum class LayerKind { Conv2D, MaxPool2, ReLU, Flatten, Dense, Dropout, Sigmoid, Softmax };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

/// Conv2D is always 3x3, stride 1, valid padding. MaxPool2 is 2x2 stride 2
/// and drops a trailing odd row/column.
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::size_t units = 0;  // filters for Conv2D, neurons for Dense
  double rate = 0.0;      // Dropout only

  static LayerSpec conv2d(std::size_t filters) { return {LayerKind::Conv2D, filters, 0.0}; }
  static LayerSpec maxpool() { return {LayerKind::MaxPool2, 0, 0.0}; }
  static LayerSpec relu() { return {LayerKind::ReLU, 0, 0.0}; }
  static LayerSpec flatten() { return {LayerKind::Flatten, 0, 0.0}; }
  static LayerSpec dense(std::size_t units) { return {LayerKind::Dense, units, 0.0}; }
  static LayerSpec dropout(double rate) { return {LayerKind::Dropout, 0, rate}; }
  static LayerSpec sigmoid() { return {LayerKind::Sigmoid, 0, 0.0}; }
  static LayerSpec softmax() { return {LayerKind::Softmax, 0, 0.0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelConfig {
  Shape input;
  std::vector<LayerSpec> layers;
  std::size_t output_classes = 1;

  /// Conv(32)-Pool-Conv(64)-Pool-Conv(128)-Pool trunk (ReLU after each conv),
  /// then Dense(128)-ReLU-Dropout(0.5)-Dense(1)-Sigmoid on size x size x 1.
  static ModelConfig detector(std::size_t image_size = 224);
  /// Same trunk on size x size x 1 with a Dense(classes)-Softmax head.
  static ModelConfig charnet(std::size_t glyph_size = 40, std::size_t classes = 26);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Shape after every layer: result[0] is the input, result[i + 1] the output
/// of layer i. Throws ShapeMismatch when the stack does not type-check.
std::vector<Shape> infer_shapes(const ModelConfig& cfg);

/// Parameters of a layer stack plus a mutation stamp used to reject
/// forward caches recorded against older weights.
class Model {
 public:
  Model() = default;
  /// Seeded initialization: He-uniform for layers feeding a ReLU,
  /// Glorot-uniform otherwise; zero biases.
  Model(ModelConfig cfg, std::uint64_t seed);
  /// Adopts existing parameters; throws ShapeMismatch if they do not fit cfg.
  Model(ModelConfig cfg, std::uint64_t seed, std::vector<Tensor> params);

  const ModelConfig& config() const noexcept { return cfg_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<Shape>& shapes() const noexcept { return shapes_; }
  const Shape& output_shape() const noexcept { return shapes_.back(); }

  std::span<const Tensor> parameters() const noexcept { return params_; }
  /// Grants write access and marks previously recorded caches stale.
  std::vector<Tensor>& mutable_parameters();
  std::size_t parameter_count() const noexcept;

  /// First parameter slot of layer i (weights, then bias), or -1.
  int parameter_slot(std::size_t layer) const noexcept { return slots_[layer]; }
  std::uint64_t stamp() const noexcept { return stamp_; }

  friend bool operator==(const Model& a, const Model& b) {
    return a.cfg_ == b.cfg_ && a.seed_ == b.seed_ && a.params_ == b.params_;
  }

 private:
  ModelConfig cfg_;
  std::uint64_t seed_ = 0;
  std::vector<Shape> shapes_;
  std::vector<int> slots_;
  std::vector<Tensor> params_;
  std::uint64_t stamp_ = 0;
};

struct ForwardCache {
  std::vector<Tensor> activations;            // input of each layer, then the final output
  std::vector<std::vector<std::uint32_t>> argmax;  // MaxPool2 winners per layer
  std::vector<std::vector<double>> masks;     // Dropout scale per element
  std::uint64_t stamp = 0;
  bool training = false;
};

struct Gradients {
  std::vector<Tensor> params;
  Tensor input;  // empty unless requested
};

/// Dropout is active only when training; its mask derives from rng_seed.
/// Pass a cache to enable backward().
Tensor forward(const Model& model, const Tensor& input, bool training, std::uint64_t rng_seed,
               ForwardCache* cache = nullptr);

/// Throws StaleCache when the cache is from inference mode or from weights
/// that changed since it was recorded.
Gradients backward(const Model& model, const ForwardCache& cache, const Tensor& loss_grad,
                   bool want_input_grad = false);

/// Adds src into dst element-wise (same shapes).
void accumulate(std::vector<Tensor>& dst, const std::vector<Tensor>& src);
std::vector<Tensor> zeros_like(std::span<const Tensor> params);

}  // namespace glyphforge::nn
