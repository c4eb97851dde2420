#pragma once

#include <filesystem>

#include "drama/encoder/config.h"
#include "drama/encoder/parameters.h"
#include "drama/util/io.h"

namespace drama::encoder {

/// Checkpoint container, little-endian:
///
///   bytes 0..7   magic "DRAMACKP"
///   u32          format version (1)
///   u64          header length N
///   N bytes      JSON header {"config", "tensors":[{name, shape, dtype,
///                group, offset}], "metadata"}
///   payload      tensor data, f64 or f32 per tensor, at header offsets
///
/// "group" is "param" for model weights and "extra" for auxiliary state
/// (optimizer moments, masks). f64 tensors round-trip bit-exactly.
struct Checkpoint {
  EncoderConfig config;
  ParameterSet params;
  ParameterSet extra;
  Json metadata = Json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Validates the magic, version, and parameter shapes against the config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace drama::encoder
