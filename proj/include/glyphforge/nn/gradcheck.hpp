#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "glyphforge/nn/model.hpp"

namespace glyphforge::nn {

struct GradCheckOptions {
  double epsilon = 1e-3;
  double tolerance = 1e-4;
  bool check_input = true;
  /// Applied to the analytic gradients before comparison; lets tests prove
  /// the harness notices a broken backward pass.
  std::function<void(Gradients&)> tamper;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  bool passed = false;
  std::size_t checked = 0;
  std::string worst;  // "param 3[17]" or "input[5]"
};

/// Central differences against backward() for every parameter (and the
/// input) of a freshly seeded model. The loss follows the head: categorical
/// cross-entropy after Softmax, binary cross-entropy after Sigmoid, squared
/// error otherwise. Input values are spaced apart so that ReLU and max-pool
/// kinks are not crossed by the perturbation.
GradCheckReport grad_check(const ModelConfig& cfg, std::uint64_t seed, const GradCheckOptions& opts = {});

/// Scaled-down charnet for gradient checks on 8x8x1 input: the same layer
/// kinds in the same order with a two-conv trunk, ending Dense(26)-Softmax.
ModelConfig toy_charnet();

/// |a - b| / max(|a|, |b|, 1e-6)
double relative_error(double analytic, double numeric) noexcept;

}  // namespace glyphforge::nn
