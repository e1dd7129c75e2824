#pragma once

// Checkpoint directory layout:
//   manifest.json  configs, tokenizer, step, metrics and the tensor table
//   tensors.bin    named tensors back to back, little-endian float32

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "sgforge/model.hpp"
#include "sgforge/tokenizer.hpp"

namespace sgforge {


struct Checkpoint {
  ModelConfig model_config;
  nlohmann::json train_config;  // TrainConfig::to_json() of the producing run
  Tokenizer tokenizer;
  Parameters params;
  std::uint64_t step = 0;
  nlohmann::json metrics = nlohmann::json::object();
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTensorFile = "tensors.bin";

/// Creates `dir` if needed. Parameters are stored as float32; values that are
/// float-representable round-trip exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::string& dir);

/// Throws Error(Io / ParseError / ShapeMismatch).
Checkpoint load_checkpoint(const std::string& dir);

std::string encode_tensors(const Parameters& params, nlohmann::json& table);
Parameters decode_tensors(const std::string& payload, const nlohmann::json& table, const ModelConfig& config);

}  // namespace sgforge
