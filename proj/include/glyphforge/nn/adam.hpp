#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glyphforge/nn/tensor.hpp"

namespace glyphforge::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Bias-corrected Adam. Moments are laid out like the parameter list they
/// were created for.
class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig cfg, std::span<const Tensor> params);
  Adam(AdamConfig cfg, std::vector<Tensor> first, std::vector<Tensor> second, std::uint64_t steps);

  /// Throws ShapeMismatch when params/grads disagree with the moments.
  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);

  const AdamConfig& config() const noexcept { return cfg_; }
  void set_learning_rate(double lr) noexcept { cfg_.learning_rate = lr; }
  std::uint64_t steps() const noexcept { return steps_; }
  const std::vector<Tensor>& first_moments() const noexcept { return m_; }
  const std::vector<Tensor>& second_moments() const noexcept { return v_; }

  friend bool operator==(const Adam&, const Adam&) = default;

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t steps_ = 0;
};

}  // namespace glyphforge::nn
