#include "glyphforge/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "json.hpp"

#include "glyphforge/error.hpp"
#include "glyphforge/image_io.hpp"

namespace glyphforge::nn {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'G', 'F', 'C', 'K', 'P', 'T', '0', '1'};

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFF) << (8 * (7 - i));
    return r;
  }
  return v;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  v = to_le(v);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + 8);
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + 8 > bytes.size()) throw Error(ErrorCode::FormatError, "checkpoint truncated");
  std::uint64_t v = 0;
  std::memcpy(&v, bytes.data() + pos, 8);
  pos += 8;
  return to_le(v);
}

void put_tensor(std::vector<std::uint8_t>& out, const Tensor& t) {
  for (double d : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

Tensor get_tensor(std::span<const std::uint8_t> bytes, std::size_t& pos, const Shape& shape) {
  std::vector<double> data(shape_size(shape));
  for (auto& d : data) d = std::bit_cast<double>(get_u64(bytes, pos));
  return Tensor(shape, std::move(data));
}

json config_to_json(const ModelConfig& cfg) {
  json layers = json::array();
  for (const auto& l : cfg.layers) {
    layers.push_back({{"kind", to_string(l.kind)}, {"units", l.units}, {"rate", l.rate}});
  }
  return {{"input", cfg.input}, {"layers", layers}, {"output_classes", cfg.output_classes}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.input = j.at("input").get<Shape>();
  for (const auto& l : j.at("layers")) {
    cfg.layers.push_back({layer_kind_from_string(l.at("kind").get<std::string>()), l.at("units").get<std::size_t>(),
                          l.at("rate").get<double>()});
  }
  cfg.output_classes = j.at("output_classes").get<std::size_t>();
  return cfg;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt) {
  const auto& opt = ckpt.optimizer;
  json shapes = json::array();
  for (const auto& p : ckpt.model.parameters()) shapes.push_back(p.shape());
  const json header = {
      {"format", 1},
      {"endianness", "little"},
      {"precision", "f64"},
      {"config", config_to_json(ckpt.model.config())},
      {"model_seed", ckpt.model.seed()},
      {"rng_seed", ckpt.rng_seed},
      {"parameter_shapes", shapes},
      {"adam",
       {{"learning_rate", opt.config().learning_rate},
        {"beta1", opt.config().beta1},
        {"beta2", opt.config().beta2},
        {"epsilon", opt.config().epsilon},
        {"steps", opt.steps()},
        {"has_moments", !opt.first_moments().empty()}}},
  };
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& p : ckpt.model.parameters()) put_tensor(out, p);
  for (const auto& m : opt.first_moments()) put_tensor(out, m);
  for (const auto& v : opt.second_moments()) put_tensor(out, v);
  return out;
}

Checkpoint deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw Error(ErrorCode::FormatError, "not a glyphforge checkpoint");
  }
  std::size_t pos = 8;
  const auto header_len = get_u64(bytes, pos);
  if (pos + header_len > bytes.size()) throw Error(ErrorCode::FormatError, "checkpoint header truncated");
  json header;
  try {
    header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + header_len));
    pos += header_len;
    if (header.at("format").get<int>() != 1 || header.at("endianness") != "little" || header.at("precision") != "f64") {
      throw Error(ErrorCode::FormatError, "unsupported checkpoint encoding");
    }
    const auto cfg = config_from_json(header.at("config"));
    const auto shapes = header.at("parameter_shapes").get<std::vector<Shape>>();
    std::vector<Tensor> params;
    for (const auto& s : shapes) params.push_back(get_tensor(bytes, pos, s));
    Model model(cfg, header.at("model_seed").get<std::uint64_t>(), std::move(params));

    const auto& a = header.at("adam");
    const AdamConfig acfg{a.at("learning_rate").get<double>(), a.at("beta1").get<double>(),
                          a.at("beta2").get<double>(), a.at("epsilon").get<double>()};
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    if (a.at("has_moments").get<bool>()) {
      for (const auto& s : shapes) m.push_back(get_tensor(bytes, pos, s));
      for (const auto& s : shapes) v.push_back(get_tensor(bytes, pos, s));
    }
    if (pos != bytes.size()) throw Error(ErrorCode::FormatError, "trailing bytes in checkpoint");
    return {std::move(model), Adam(acfg, std::move(m), std::move(v), a.at("steps").get<std::uint64_t>()),
            header.at("rng_seed").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, serialize(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize(read_file(path)); }

}  // namespace glyphforge::nn
