#pragma once

// Optimization loop: Adam, loss-weight calibration, epochs, dev scoring.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sgforge/checkpoint.hpp"
#include "sgforge/graph.hpp"
#include "sgforge/model.hpp"
#include "sgforge/tags.hpp"
#include "sgforge/tokenizer.hpp"

namespace sgforge {

struct TrainConfig {
  enum class LambdaMode { Auto, Fixed };

  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t epochs = 4;
  std::size_t batch_size = 32;
  std::uint64_t seed = 17;
  LambdaMode lambda_mode = LambdaMode::Auto;
  double lambda_value = 1.0;  // Fixed mode only

  /// Throws Error(InvalidConfig).
  void validate() const;

  /// "lambda" is either the string "auto" or a number.
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t step = 0;
};

/// Bias-corrected Adam. State is lazily sized on the first call.
/// Throws Error(ShapeMismatch) when params, grads and state disagree.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamState& state,
               const TrainConfig& config);
void adam_step(Parameters& params, const Parameters& grads, AdamState& state, const TrainConfig& config);

/// One supervised region: its description, the oracle's word-level tags and
/// the reference graph used for dev scoring.
struct Example {
  std::int64_t region_id = 0;
  std::string description;
  TaggedSentence target;
  SceneGraph reference;
};

/// class_mean / parent_mean, or 1 when the parent mean is 0.
double lambda_from_means(double class_mean, double parent_mean);

/// Mean class and parent losses (lambda = 1) over `batch` at `params`, then
/// lambda_from_means. Parent mean averages only examples with parent terms.
double calibrate_lambda(const Parameters& params, const ModelConfig& config, const Tokenizer& tokenizer,
                        std::span<const Example> batch);

struct EpochLog {
  std::size_t epoch = 0;
  std::uint64_t steps = 0;
  double train_loss = 0;
  std::optional<double> dev_loss;
  std::optional<double> dev_f;
  double lambda = 1;

  nlohmann::ordered_json to_json() const;
};

struct TrainResult {
  Checkpoint final_checkpoint;
  Checkpoint best_checkpoint;  // best dev F; equals final when there is no dev set
  std::vector<EpochLog> epochs;
  std::size_t skipped_too_long = 0;
};

/// Mean loss of `params` over `examples` (skipping sequences that do not fit).
double mean_loss(const Parameters& params, const ModelConfig& config, const Tokenizer& tokenizer,
                 std::span<const Example> examples);

/// Parses every example's description and returns the base-mode corpus F.
double corpus_f1(const Parameters& params, const ModelConfig& config, const Tokenizer& tokenizer,
                 std::span<const Example> examples);

/// Runs the full loop. `model_config.vocab_size` and tokenizer mode are taken
/// from `tokenizer`. Writes one JSON object per epoch to `log` when given.
/// Throws Error(EmptyDataset) when no training example fits the model.
TrainResult train(const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                  ModelConfig model_config, const TrainConfig& train_config, const Tokenizer& tokenizer,
                  std::ostream* log = nullptr);

}  // namespace sgforge
