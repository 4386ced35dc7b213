#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace glyphforge::nn {

inline constexpr double kProbClamp = 1e-7;

struct ScalarLoss {
  double loss = 0.0;
  double grad = 0.0;  // d loss / d pred
};

struct VectorLoss {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d pred
};

/// pred is clamped to [1e-7, 1 - 1e-7] before use.
ScalarLoss binary_cross_entropy(double pred, int label);

/// -ln p[label]; p[label] clamped below at 1e-7. Throws InvalidArgument
/// when the probabilities do not sum to 1 within 1e-6.
VectorLoss categorical_cross_entropy(std::span<const double> probs, std::size_t label);

/// 0.5 * sum (pred - target)^2
VectorLoss squared_error(std::span<const double> pred, std::span<const double> target);

}  // namespace glyphforge::nn
