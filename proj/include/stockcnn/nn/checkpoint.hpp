#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stockcnn/nn/model.hpp"

namespace stockcnn::nn {

// Layout, all integers little-endian:
//   "STOCKCNN"                 8-byte magic
//   u32 version (1)
//   u32 input rank, u32 dims[rank]
//   u32 layer count, then per layer: u8 kind, u32 units, u32 kernel, f64 rate
//   u32 tensor count, then per tensor: u32 rank, u32 dims[rank], f32 values[prod(dims)]
inline constexpr std::string_view kCheckpointMagic = "STOCKCNN";
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const ModelSpec& spec, const Params<float>& params);

struct Checkpoint {
    ModelSpec spec;
    Params<float> params;
};

/// Throws Error{Io} on a truncated or foreign file.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec, const Params<float>& params);

/// Throws Error{SpecMismatch} when the stored spec differs from `expected`.
Params<float> load_checkpoint(const std::filesystem::path& path, const ModelSpec& expected);

} // namespace stockcnn::nn
