#include "glyphforge/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glyphforge/error.hpp"

namespace glyphforge::nn {

ScalarLoss binary_cross_entropy(double pred, int label) {
  if (label != 0 && label != 1) throw Error(ErrorCode::InvalidArgument, "binary label must be 0 or 1");
  const double p = std::clamp(pred, kProbClamp, 1.0 - kProbClamp);
  if (label == 1) return {-std::log(p), -1.0 / p};
  return {-std::log(1.0 - p), 1.0 / (1.0 - p)};
}

VectorLoss categorical_cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) throw Error(ErrorCode::InvalidArgument, "label index out of range");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6) throw Error(ErrorCode::InvalidArgument, "probabilities do not sum to 1");
  const double p = std::max(probs[label], kProbClamp);
  VectorLoss out{-std::log(p), std::vector<double>(probs.size(), 0.0)};
  out.grad[label] = -1.0 / p;
  return out;
}

VectorLoss squared_error(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw Error(ErrorCode::ShapeMismatch, "prediction/target length mismatch");
  VectorLoss out{0.0, std::vector<double>(pred.size())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    out.loss += 0.5 * d * d;
    out.grad[i] = d;
  }
  return out;
}

}  // namespace glyphforge::nn
