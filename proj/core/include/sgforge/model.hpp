#pragma once

// Attention Graph model: a small decoder-only Transformer backbone with a
// head that reads, for every token, node-type logits and parent-attention
// logits over all positions (ROOT included). Forward and backward passes are
// hand-written in double precision.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "sgforge/tags.hpp"
#include "sgforge/tokenizer.hpp"

namespace sgforge {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 256;
  std::size_t max_len = 32;  // words (or pieces) per sentence, ROOT excluded
  std::size_t d_qk = 64;     // width of the parent-attention query/key vectors
  double loss_weight = 1.0;  // lambda on the parent term
  TokenizerMode tokenizer_mode = TokenizerMode::Word;

  static constexpr std::size_t n_classes = kNumNodeTypes;

  /// Throws Error(InvalidConfig).
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static ModelConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LayerParameters {
  Matrix w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;
  Matrix ln1_gain, ln1_bias;
  Matrix w_ff1, b_ff1, w_ff2, b_ff2;
  Matrix ln2_gain, ln2_bias;
};

/// Named parameter tensors. Biases and layer-norm vectors are 1xN matrices.
struct Parameters {
  Matrix token_embedding;     // vocab x d_model
  Matrix position_embedding;  // (max_len + 1) x d_model
  std::vector<LayerParameters> layers;
  Matrix head_w_c;  // d_model x 6
  Matrix head_w_q;  // d_model x d_qk
  Matrix head_w_k;  // d_model x d_qk

  /// Zero-valued tensors with the shapes implied by `config`.
  static Parameters zeros(const ModelConfig& config);

  /// N(0, 0.02) weights and embeddings, zero biases, unit layer-norm gains.
  static Parameters initialize(const ModelConfig& config, std::mt19937_64& rng);

  /// Stable (name, tensor) enumeration; the order is the checkpoint order.
  void for_each(const std::function<void(const std::string&, Matrix&)>& fn);
  void for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const;

  Parameters zeros_like() const;
  std::size_t count() const;

  /// Rounds every value to the nearest float32 so checkpoints are lossless.
  void round_to_float();

  Parameters& operator+=(const Parameters& other);
  Parameters& operator*=(double s);
};

struct ModelOutputs {
  Matrix class_logits;   // T x 6, row i-1 is position i
  Matrix parent_logits;  // T x (T+1), column j is candidate parent j (0 = ROOT)

  std::size_t length() const noexcept { return static_cast<std::size_t>(class_logits.rows()); }
};

/// Intermediate activations needed by backward().
struct ForwardTrace {
  struct LayerNormCache {
    Matrix normalized;
    Eigen::VectorXd inv_std;
  };
  struct Layer {
    Matrix input, q, k, v;
    std::vector<Matrix> probs;  // per head, n x n
    Matrix context, ln1_out, ff_pre, ff_act;
    LayerNormCache ln1, ln2;
  };
  std::vector<TokenId> ids;
  std::vector<Layer> layers;
  Matrix hidden;  // n x d_model, final backbone states h_0..h_T
  Matrix head_q;  // n x d_qk
  Matrix head_k;  // n x d_qk
  ModelOutputs outputs;
};

/// Throws Error(SequenceTooLong) when ids.size() > max_len + 1 and
/// Error(LengthMismatch) when ids is empty.
ModelOutputs forward(const Parameters& params, const ModelConfig& config, const std::vector<TokenId>& ids);
ForwardTrace forward_trace(const Parameters& params, const ModelConfig& config, const std::vector<TokenId>& ids);

/// Backbone hidden states after every layer (index 0 = embeddings).
std::vector<Matrix> hidden_states(const Parameters& params, const ModelConfig& config,
                                  const std::vector<TokenId>& ids);

struct LossValue {
  double total = 0;
  double class_loss = 0;   // mean CE over all positions
  double parent_loss = 0;  // mean CE over non-NONE positions (0 if none)
  std::size_t parent_terms = 0;
  Matrix d_class_logits;
  Matrix d_parent_logits;  // rows of NONE targets are exactly zero
};

/// L = mean_i CE(class_i) + lambda * mean_{i: type != NONE} CE(parent_i).
/// `target` is token-level: one TaggedToken per non-ROOT position.
/// Throws Error(LengthMismatch).
LossValue loss(const ModelOutputs& outputs, const TaggedSentence& target, double lambda);

/// Gradient of the loss w.r.t. every parameter, given d(loss)/d(logits).
Parameters backward(const Parameters& params, const ModelConfig& config, const ForwardTrace& trace,
                    const Matrix& d_class_logits, const Matrix& d_parent_logits);

struct LossAndGradients {
  LossValue value;
  Parameters gradients;
};

LossAndGradients loss_and_gradients(const Parameters& params, const ModelConfig& config,
                                    const std::vector<TokenId>& ids, const TaggedSentence& target,
                                    double lambda);

/// Maps a word-level target onto subword positions: each word's label moves
/// to its final piece; earlier pieces become SAME pointing at it.
TaggedSentence expand_target(const TaggedSentence& words, const TokenSequence& seq);

/// Reads a TaggedSentence from model outputs: argmax node type per word head
/// (ties -> lowest class index), argmax parent over ROOT and word heads
/// (ties -> lowest position). NONE tokens get parent 0.
TaggedSentence read_outputs(const ModelOutputs& outputs, const TokenSequence& seq);

/// Tokenizes, truncates to max_len, runs the model and reads the outputs.
/// Words beyond the model's capacity are tagged NONE.
TaggedSentence predict(const Parameters& params, const ModelConfig& config, const Tokenizer& tokenizer,
                       std::string_view text);

}  // namespace sgforge
