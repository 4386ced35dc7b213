#include "glyphforge/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "glyphforge/nn/loss.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge::nn {

double relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

ModelConfig toy_charnet() {
  return {{8, 8, 1},
          {LayerSpec::conv2d(4), LayerSpec::relu(), LayerSpec::maxpool(), LayerSpec::conv2d(8), LayerSpec::relu(),
           LayerSpec::flatten(), LayerSpec::dense(16), LayerSpec::relu(), LayerSpec::dropout(0.5),
           LayerSpec::dense(26), LayerSpec::softmax()},
          26};
}

namespace {

struct Objective {
  LayerKind head;
  std::size_t label = 0;
  std::vector<double> target;

  VectorLoss eval(const Tensor& out) const {
    switch (head) {
      case LayerKind::Softmax: return categorical_cross_entropy(out.data(), label);
      case LayerKind::Sigmoid: {
        const auto l = binary_cross_entropy(out[0], static_cast<int>(label));
        return {l.loss, {l.grad}};
      }
      default: return squared_error(out.data(), target);
    }
  }
};

}  // namespace

GradCheckReport grad_check(const ModelConfig& cfg, std::uint64_t seed, const GradCheckOptions& opts) {
  Model model(cfg, seed);
  Rng rng(mix_seed(seed, 1));

  // Evenly spaced values, shuffled, none closer than one step to zero.
  Tensor input(cfg.input);
  const std::size_t n = input.size();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = -1.0 + (2.0 * i + 1.0) / static_cast<double>(n);
  shuffle(values, rng);
  std::copy(values.begin(), values.end(), input.data().begin());

  Objective obj{cfg.layers.empty() ? LayerKind::ReLU : cfg.layers.back().kind, 0, {}};
  const Shape& out_shape = model.output_shape();
  if (obj.head == LayerKind::Softmax) {
    obj.label = static_cast<std::size_t>(rng() % out_shape[0]);
  } else if (obj.head == LayerKind::Sigmoid) {
    obj.label = static_cast<std::size_t>(rng() % 2);
  } else {
    obj.target.resize(shape_size(out_shape));
    for (auto& t : obj.target) t = uniform(rng, -1.0, 1.0);
  }

  const std::uint64_t dropout_seed = mix_seed(seed, 2);
  ForwardCache cache;
  const Tensor out = forward(model, input, true, dropout_seed, &cache);
  const auto loss = obj.eval(out);
  Gradients analytic = backward(model, cache, Tensor(out_shape, loss.grad), opts.check_input);
  if (opts.tamper) opts.tamper(analytic);

  auto loss_at = [&](const Tensor& x) { return obj.eval(forward(model, x, true, dropout_seed)).loss; };

  GradCheckReport report;
  auto record = [&](double a, double num, const std::string& where) {
    const double e = relative_error(a, num);
    ++report.checked;
    if (report.worst.empty() || e > report.max_relative_error) {
      report.max_relative_error = e;
      report.worst = where;
    }
  };

  auto& params = model.mutable_parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t k = 0; k < params[p].size(); ++k) {
      const double orig = params[p][k];
      params[p][k] = orig + opts.epsilon;
      const double up = loss_at(input);
      params[p][k] = orig - opts.epsilon;
      const double down = loss_at(input);
      params[p][k] = orig;
      record(analytic.params[p][k], (up - down) / (2.0 * opts.epsilon),
             "param " + std::to_string(p) + "[" + std::to_string(k) + "]");
    }
  }
  if (opts.check_input) {
    Tensor x = input;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double orig = x[k];
      x[k] = orig + opts.epsilon;
      const double up = loss_at(x);
      x[k] = orig - opts.epsilon;
      const double down = loss_at(x);
      x[k] = orig;
      record(analytic.input[k], (up - down) / (2.0 * opts.epsilon), "input[" + std::to_string(k) + "]");
    }
  }
  report.passed = report.max_relative_error < opts.tolerance;
  return report;
}

}  // namespace glyphforge::nn
