#pragma once

#include <string>

#include "sdcn/autoencoder.hpp"

namespace sdcn {

// Model container: magic "SDCN", u16 LE format version, u32 LE manifest
// length + UTF-8 JSON manifest (architecture, layer shapes, seed, training
// metadata), per-layer raw little-endian f32 blobs in manifest order
// (weights row-major, then bias), and a trailing CRC32 over manifest +
// payload bytes. Round trips are bit-exact.

inline constexpr std::uint16_t kModelFormatVersion = 1;

/// `training_meta_json` is an optional JSON object (serialized) stored
/// verbatim in the manifest's "training" field.
void save_model(const AutoEncoder<float>& model, const std::string& path,
                const std::string& training_meta_json = "");

AutoEncoder<float> load_model(const std::string& path);

/// Training metadata stored in the manifest, or "" when absent.
std::string load_model_training_meta(const std::string& path);

}  // namespace sdcn
