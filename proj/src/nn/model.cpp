#include "glyphforge/nn/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "glyphforge/error.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge::nn {

namespace {

std::atomic<std::uint64_t> g_stamp{1};

std::uint64_t next_stamp() { return g_stamp.fetch_add(1, std::memory_order_relaxed); }

[[noreturn]] void shape_error(const std::string& msg) { throw Error(ErrorCode::ShapeMismatch, msg); }

void append_trunk(std::vector<LayerSpec>& layers) {
  for (std::size_t filters : {32u, 64u, 128u}) {
    layers.push_back(LayerSpec::conv2d(filters));
    layers.push_back(LayerSpec::relu());
    layers.push_back(LayerSpec::maxpool());
  }
  layers.push_back(LayerSpec::flatten());
  layers.push_back(LayerSpec::dense(128));
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::dropout(0.5));
}

}  // namespace

std::size_t shape_size(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) shape_error("tensor data does not match shape " + nn::to_string(shape_));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::MaxPool2: return "maxpool2";
    case LayerKind::ReLU: return "relu";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Sigmoid: return "sigmoid";
    case LayerKind::Softmax: return "softmax";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& name) {
  for (auto k : {LayerKind::Conv2D, LayerKind::MaxPool2, LayerKind::ReLU, LayerKind::Flatten, LayerKind::Dense,
                 LayerKind::Dropout, LayerKind::Sigmoid, LayerKind::Softmax}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::FormatError, "unknown layer kind '" + name + "'");
}

ModelConfig ModelConfig::detector(std::size_t image_size) {
  ModelConfig cfg;
  cfg.input = {image_size, image_size, 1};
  append_trunk(cfg.layers);
  cfg.layers.push_back(LayerSpec::dense(1));
  cfg.layers.push_back(LayerSpec::sigmoid());
  cfg.output_classes = 1;
  return cfg;
}

ModelConfig ModelConfig::charnet(std::size_t glyph_size, std::size_t classes) {
  ModelConfig cfg;
  cfg.input = {glyph_size, glyph_size, 1};
  append_trunk(cfg.layers);
  cfg.layers.push_back(LayerSpec::dense(classes));
  cfg.layers.push_back(LayerSpec::softmax());
  cfg.output_classes = classes;
  return cfg;
}

std::vector<Shape> infer_shapes(const ModelConfig& cfg) {
  if (cfg.input.empty() || shape_size(cfg.input) == 0) shape_error("empty input shape");
  std::vector<Shape> shapes{cfg.input};
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const auto& spec = cfg.layers[i];
    const Shape& in = shapes.back();
    const std::string where = "layer " + std::to_string(i) + " (" + to_string(spec.kind) + ") on " + to_string(in);
    Shape out;
    switch (spec.kind) {
      case LayerKind::Conv2D:
        if (in.size() != 3 || in[0] < 3 || in[1] < 3 || spec.units == 0) shape_error(where);
        out = {in[0] - 2, in[1] - 2, spec.units};
        break;
      case LayerKind::MaxPool2:
        if (in.size() != 3 || in[0] < 2 || in[1] < 2) shape_error(where);
        out = {in[0] / 2, in[1] / 2, in[2]};
        break;
      case LayerKind::Flatten:
        out = {shape_size(in)};
        break;
      case LayerKind::Dense:
        if (in.size() != 1 || spec.units == 0) shape_error(where);
        out = {spec.units};
        break;
      case LayerKind::Dropout:
        if (!(spec.rate >= 0.0 && spec.rate < 1.0)) shape_error(where + ": dropout rate outside [0,1)");
        out = in;
        break;
      case LayerKind::Softmax:
        if (in.size() != 1) shape_error(where);
        out = in;
        break;
      case LayerKind::ReLU:
      case LayerKind::Sigmoid:
        out = in;
        break;
    }
    shapes.push_back(std::move(out));
  }
  return shapes;
}

Model::Model(ModelConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed), shapes_(infer_shapes(cfg_)), stamp_(next_stamp()) {
  Rng rng(seed);
  slots_.assign(cfg_.layers.size(), -1);
  for (std::size_t i = 0; i < cfg_.layers.size(); ++i) {
    const auto& spec = cfg_.layers[i];
    if (spec.kind != LayerKind::Conv2D && spec.kind != LayerKind::Dense) continue;
    const Shape& in = shapes_[i];
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    Shape wshape;
    if (spec.kind == LayerKind::Conv2D) {
      wshape = {3, 3, in[2], spec.units};
      fan_in = 9 * in[2];
      fan_out = 9 * spec.units;
    } else {
      wshape = {in[0], spec.units};
      fan_in = in[0];
      fan_out = spec.units;
    }
    const bool feeds_relu = i + 1 < cfg_.layers.size() && cfg_.layers[i + 1].kind == LayerKind::ReLU;
    const double limit = feeds_relu ? std::sqrt(6.0 / static_cast<double>(fan_in))
                                    : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w(wshape);
    for (auto& v : w.data()) v = uniform(rng, -limit, limit);
    slots_[i] = static_cast<int>(params_.size());
    params_.push_back(std::move(w));
    params_.emplace_back(Shape{spec.units}, 0.0);
  }
}

Model::Model(ModelConfig cfg, std::uint64_t seed, std::vector<Tensor> params) : Model(std::move(cfg), seed) {
  if (params.size() != params_.size()) shape_error("parameter count does not match config");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != params_[i].shape()) {
      shape_error("parameter " + std::to_string(i) + " has shape " + to_string(params[i].shape()) + ", expected " +
                  to_string(params_[i].shape()));
    }
  }
  params_ = std::move(params);
}

std::vector<Tensor>& Model::mutable_parameters() {
  stamp_ = next_stamp();
  return params_;
}

std::size_t Model::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

namespace {

void conv_forward(const Tensor& in, const Tensor& w, const Tensor& b, Tensor& out) {
  const std::size_t ih = in.shape()[0], iw = in.shape()[1], c = in.shape()[2];
  const std::size_t oh = ih - 2, ow = iw - 2, f = w.shape()[3];
  const double* pin = in.data().data();
  const double* pw = w.data().data();
  double* po = out.data().data();
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double* o = po + (y * ow + x) * f;
      std::copy(b.data().begin(), b.data().end(), o);
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const double* ip = pin + ((y + ky) * iw + (x + kx)) * c;
          const double* wp = pw + (ky * 3 + kx) * c * f;
          for (std::size_t ci = 0; ci < c; ++ci) {
            const double v = ip[ci];
            const double* wr = wp + ci * f;
            for (std::size_t fi = 0; fi < f; ++fi) o[fi] += v * wr[fi];
          }
        }
      }
    }
  }
}

void conv_backward(const Tensor& in, const Tensor& w, const Tensor& dout, Tensor& dw, Tensor& db, Tensor* din) {
  const std::size_t iw = in.shape()[1], c = in.shape()[2];
  const std::size_t oh = dout.shape()[0], ow = dout.shape()[1], f = w.shape()[3];
  const double* pin = in.data().data();
  const double* pw = w.data().data();
  const double* pd = dout.data().data();
  double* pdw = dw.data().data();
  double* pdb = db.data().data();
  double* pdin = din ? din->data().data() : nullptr;
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      const double* g = pd + (y * ow + x) * f;
      for (std::size_t fi = 0; fi < f; ++fi) pdb[fi] += g[fi];
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::size_t ioff = ((y + ky) * iw + (x + kx)) * c;
          const double* ip = pin + ioff;
          const std::size_t woff = (ky * 3 + kx) * c * f;
          for (std::size_t ci = 0; ci < c; ++ci) {
            const double v = ip[ci];
            double* dwr = pdw + woff + ci * f;
            for (std::size_t fi = 0; fi < f; ++fi) dwr[fi] += v * g[fi];
          }
          if (pdin) {
            double* dip = pdin + ioff;
            for (std::size_t ci = 0; ci < c; ++ci) {
              const double* wr = pw + woff + ci * f;
              double acc = 0.0;
              for (std::size_t fi = 0; fi < f; ++fi) acc += wr[fi] * g[fi];
              dip[ci] += acc;
            }
          }
        }
      }
    }
  }
}

void pool_forward(const Tensor& in, Tensor& out, std::vector<std::uint32_t>* argmax) {
  const std::size_t iw = in.shape()[1], c = in.shape()[2];
  const std::size_t oh = out.shape()[0], ow = out.shape()[1];
  if (argmax) argmax->resize(out.size());
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      for (std::size_t ci = 0; ci < c; ++ci) {
        std::size_t best = ((2 * y) * iw + 2 * x) * c + ci;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = ((2 * y + dy) * iw + 2 * x + dx) * c + ci;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (y * ow + x) * c + ci;
        out[o] = in[best];
        if (argmax) (*argmax)[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

void dense_forward(const Tensor& in, const Tensor& w, const Tensor& b, Tensor& out) {
  const std::size_t n = in.size(), u = b.size();
  std::copy(b.data().begin(), b.data().end(), out.data().begin());
  const double* pw = w.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = in[i];
    if (v == 0.0) continue;
    const double* wr = pw + i * u;
    for (std::size_t j = 0; j < u; ++j) po[j] += v * wr[j];
  }
}

}  // namespace

Tensor forward(const Model& model, const Tensor& input, bool training, std::uint64_t rng_seed, ForwardCache* cache) {
  const auto& cfg = model.config();
  const auto& shapes = model.shapes();
  if (input.shape() != shapes.front()) {
    shape_error("input shape " + to_string(input.shape()) + " does not match model input " + to_string(shapes.front()));
  }
  const auto params = model.parameters();
  Rng rng(rng_seed);
  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(cfg.layers.size() + 1);
    cache->argmax.assign(cfg.layers.size(), {});
    cache->masks.assign(cfg.layers.size(), {});
    cache->stamp = model.stamp();
    cache->training = training;
  }

  Tensor cur = input;
  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const auto& spec = cfg.layers[i];
    Tensor out(shapes[i + 1]);
    switch (spec.kind) {
      case LayerKind::Conv2D: {
        const int s = model.parameter_slot(i);
        conv_forward(cur, params[s], params[s + 1], out);
        break;
      }
      case LayerKind::MaxPool2:
        pool_forward(cur, out, cache ? &cache->argmax[i] : nullptr);
        break;
      case LayerKind::ReLU:
        for (std::size_t k = 0; k < cur.size(); ++k) out[k] = cur[k] > 0.0 ? cur[k] : 0.0;
        break;
      case LayerKind::Flatten:
        out = Tensor(shapes[i + 1], std::vector<double>(cur.data().begin(), cur.data().end()));
        break;
      case LayerKind::Dense: {
        const int s = model.parameter_slot(i);
        dense_forward(cur, params[s], params[s + 1], out);
        break;
      }
      case LayerKind::Dropout:
        if (!training || spec.rate == 0.0) {
          out = cur;
        } else {
          const double keep = 1.0 - spec.rate;
          std::vector<double> mask(cur.size());
          for (std::size_t k = 0; k < cur.size(); ++k) {
            mask[k] = uniform01(rng) < keep ? 1.0 / keep : 0.0;
            out[k] = cur[k] * mask[k];
          }
          if (cache) cache->masks[i] = std::move(mask);
        }
        break;
      case LayerKind::Sigmoid:
        for (std::size_t k = 0; k < cur.size(); ++k) {
          const double z = cur[k];
          out[k] = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        }
        break;
      case LayerKind::Softmax: {
        const double mx = *std::max_element(cur.data().begin(), cur.data().end());
        double sum = 0.0;
        for (std::size_t k = 0; k < cur.size(); ++k) sum += (out[k] = std::exp(cur[k] - mx));
        for (std::size_t k = 0; k < cur.size(); ++k) out[k] /= sum;
        break;
      }
    }
    if (cache) cache->activations.push_back(std::move(cur));
    cur = std::move(out);
  }
  if (cache) cache->activations.push_back(cur);
  return cur;
}

Gradients backward(const Model& model, const ForwardCache& cache, const Tensor& loss_grad, bool want_input_grad) {
  const auto& cfg = model.config();
  const auto& shapes = model.shapes();
  if (!cache.training || cache.stamp != model.stamp() || cache.activations.size() != cfg.layers.size() + 1) {
    throw Error(ErrorCode::StaleCache, "backward needs a training-mode cache recorded against the current weights");
  }
  if (loss_grad.shape() != shapes.back()) {
    shape_error("loss gradient shape " + to_string(loss_grad.shape()) + " does not match output " +
                to_string(shapes.back()));
  }
  const auto params = model.parameters();
  Gradients grads{zeros_like(params), {}};

  Tensor g = loss_grad;
  for (std::size_t ii = cfg.layers.size(); ii-- > 0;) {
    const auto& spec = cfg.layers[ii];
    const Tensor& in = cache.activations[ii];
    const Tensor& out = cache.activations[ii + 1];
    const bool need_din = ii > 0 || want_input_grad;
    Tensor din(shapes[ii]);
    switch (spec.kind) {
      case LayerKind::Conv2D: {
        const int s = model.parameter_slot(ii);
        conv_backward(in, params[s], g, grads.params[s], grads.params[s + 1], need_din ? &din : nullptr);
        break;
      }
      case LayerKind::MaxPool2: {
        const auto& am = cache.argmax[ii];
        for (std::size_t k = 0; k < g.size(); ++k) din[am[k]] += g[k];
        break;
      }
      case LayerKind::ReLU:
        for (std::size_t k = 0; k < g.size(); ++k) din[k] = in[k] > 0.0 ? g[k] : 0.0;
        break;
      case LayerKind::Flatten:
        din = Tensor(shapes[ii], std::vector<double>(g.data().begin(), g.data().end()));
        break;
      case LayerKind::Dense: {
        const int s = model.parameter_slot(ii);
        const std::size_t n = in.size(), u = g.size();
        const double* pw = params[s].data().data();
        double* pdw = grads.params[s].data().data();
        for (std::size_t j = 0; j < u; ++j) grads.params[s + 1][j] += g[j];
        for (std::size_t i = 0; i < n; ++i) {
          const double v = in[i];
          double* dwr = pdw + i * u;
          const double* wr = pw + i * u;
          double acc = 0.0;
          for (std::size_t j = 0; j < u; ++j) {
            dwr[j] += v * g[j];
            acc += wr[j] * g[j];
          }
          din[i] = acc;
        }
        break;
      }
      case LayerKind::Dropout: {
        const auto& mask = cache.masks[ii];
        if (mask.empty()) {
          din = g;
        } else {
          for (std::size_t k = 0; k < g.size(); ++k) din[k] = g[k] * mask[k];
        }
        break;
      }
      case LayerKind::Sigmoid:
        for (std::size_t k = 0; k < g.size(); ++k) din[k] = g[k] * out[k] * (1.0 - out[k]);
        break;
      case LayerKind::Softmax: {
        double dot = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) dot += g[k] * out[k];
        for (std::size_t k = 0; k < g.size(); ++k) din[k] = out[k] * (g[k] - dot);
        break;
      }
    }
    if (!need_din) break;
    g = std::move(din);
  }
  if (want_input_grad) grads.input = std::move(g);
  return grads;
}

void accumulate(std::vector<Tensor>& dst, const std::vector<Tensor>& src) {
  if (dst.size() != src.size()) shape_error("gradient list length mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].shape() != src[i].shape()) shape_error("gradient shape mismatch");
    auto d = dst[i].data();
    auto s = src[i].data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
  }
}

std::vector<Tensor> zeros_like(std::span<const Tensor> params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.shape(), 0.0);
  return out;
}

}  // namespace glyphforge::nn
