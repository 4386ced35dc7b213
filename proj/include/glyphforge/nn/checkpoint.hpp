#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glyphforge/nn/adam.hpp"
#include "glyphforge/nn/model.hpp"

namespace glyphforge::nn {

/// Container layout:
///   8 bytes  magic "GFCKPT01"
///   u64 LE   header length
///   header   UTF-8 JSON: config, seeds, optimizer settings, tensor shapes,
///            {"endianness": "little", "precision": "f64"}
///   payload  parameters, then first moments, then second moments, each
///            tensor as raw little-endian IEEE-754 doubles
struct Checkpoint {
  Model model;
  Adam optimizer;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt);
Checkpoint deserialize(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace glyphforge::nn
