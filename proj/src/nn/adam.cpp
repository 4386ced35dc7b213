#include "glyphforge/nn/adam.hpp"

#include <cmath>

#include "glyphforge/error.hpp"
#include "glyphforge/nn/model.hpp"

namespace glyphforge::nn {

Adam::Adam(AdamConfig cfg, std::span<const Tensor> params)
    : cfg_(cfg), m_(zeros_like(params)), v_(zeros_like(params)) {}

Adam::Adam(AdamConfig cfg, std::vector<Tensor> first, std::vector<Tensor> second, std::uint64_t steps)
    : cfg_(cfg), m_(std::move(first)), v_(std::move(second)), steps_(steps) {
  if (m_.size() != v_.size()) throw Error(ErrorCode::ShapeMismatch, "moment lists differ in length");
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (m_[i].shape() != v_[i].shape()) throw Error(ErrorCode::ShapeMismatch, "moment shapes differ");
  }
}

void Adam::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam: parameter/gradient count mismatch");
  }
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (params[i].shape() != m_[i].shape() || grads[i].shape() != m_[i].shape()) {
      throw Error(ErrorCode::ShapeMismatch, "adam: shape mismatch at parameter " + std::to_string(i));
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t i = 0; i < m_.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = m_[i].data();
    auto v = v_[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p[k] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

}  // namespace glyphforge::nn
