#include "sgforge/model.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "sgforge/error.hpp"

namespace sgforge {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidConfig, what);
}

}  // namespace

void ModelConfig::validate() const {
  require(vocab_size >= 4, "vocab_size must cover the 4 reserved tokens");
  require(d_model > 0 && n_heads > 0, "d_model and n_heads must be positive");
  require(d_model % n_heads == 0, "d_model must be divisible by n_heads");
  require(d_ff > 0 && max_len > 0 && d_qk > 0, "d_ff, max_len and d_qk must be positive");
  require(loss_weight >= 0 && std::isfinite(loss_weight), "loss_weight must be a finite non-negative number");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"vocab_size", vocab_size}, {"d_model", d_model},   {"n_layers", n_layers},
          {"n_heads", n_heads},       {"d_ff", d_ff},         {"max_len", max_len},
          {"d_qk", d_qk},             {"n_classes", n_classes}, {"loss_weight", loss_weight},
          {"tokenizer_mode", std::string(to_string(tokenizer_mode))}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "model config must be a JSON object");
  ModelConfig c;
  try {
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.d_model = j.value("d_model", c.d_model);
    c.n_layers = j.value("n_layers", c.n_layers);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.d_ff = j.value("d_ff", c.d_ff);
    c.max_len = j.value("max_len", c.max_len);
    c.d_qk = j.value("d_qk", c.d_qk);
    c.loss_weight = j.value("loss_weight", c.loss_weight);
    if (j.contains("tokenizer_mode")) c.tokenizer_mode = parse_tokenizer_mode(j["tokenizer_mode"].get<std::string>());
    if (j.contains("n_classes") && j["n_classes"].get<std::size_t>() != n_classes)
      throw Error(ErrorKind::InvalidConfig, "n_classes is fixed at 6");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Parameters

Parameters Parameters::zeros(const ModelConfig& c) {
  const auto d = static_cast<Eigen::Index>(c.d_model);
  const auto ff = static_cast<Eigen::Index>(c.d_ff);
  Parameters p;
  p.token_embedding = Matrix::Zero(static_cast<Eigen::Index>(c.vocab_size), d);
  p.position_embedding = Matrix::Zero(static_cast<Eigen::Index>(c.max_len + 1), d);
  p.layers.resize(c.n_layers);
  for (auto& l : p.layers) {
    for (Matrix* w : {&l.w_q, &l.w_k, &l.w_v, &l.w_o}) *w = Matrix::Zero(d, d);
    for (Matrix* b : {&l.b_q, &l.b_k, &l.b_v, &l.b_o, &l.ln1_bias, &l.ln2_bias, &l.b_ff2}) *b = Matrix::Zero(1, d);
    l.ln1_gain = Matrix::Zero(1, d);
    l.ln2_gain = Matrix::Zero(1, d);
    l.w_ff1 = Matrix::Zero(d, ff);
    l.b_ff1 = Matrix::Zero(1, ff);
    l.w_ff2 = Matrix::Zero(ff, d);
  }
  p.head_w_c = Matrix::Zero(d, static_cast<Eigen::Index>(ModelConfig::n_classes));
  p.head_w_q = Matrix::Zero(d, static_cast<Eigen::Index>(c.d_qk));
  p.head_w_k = Matrix::Zero(d, static_cast<Eigen::Index>(c.d_qk));
  return p;
}

Parameters Parameters::initialize(const ModelConfig& c, std::mt19937_64& rng) {
  c.validate();
  Parameters p = zeros(c);
  std::normal_distribution<double> normal(0.0, kInitStd);
  auto fill = [&](Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  };
  fill(p.token_embedding);
  fill(p.position_embedding);
  for (auto& l : p.layers) {
    for (Matrix* w : {&l.w_q, &l.w_k, &l.w_v, &l.w_o, &l.w_ff1, &l.w_ff2}) fill(*w);
    l.ln1_gain.setOnes();
    l.ln2_gain.setOnes();
  }
  fill(p.head_w_c);
  fill(p.head_w_q);
  fill(p.head_w_k);
  return p;
}

void Parameters::for_each(const std::function<void(const std::string&, Matrix&)>& fn) {
  fn("embed.token", token_embedding);
  fn("embed.position", position_embedding);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& l = layers[i];
    const std::string pre = "layers." + std::to_string(i) + ".";
    fn(pre + "attn.w_q", l.w_q);
    fn(pre + "attn.b_q", l.b_q);
    fn(pre + "attn.w_k", l.w_k);
    fn(pre + "attn.b_k", l.b_k);
    fn(pre + "attn.w_v", l.w_v);
    fn(pre + "attn.b_v", l.b_v);
    fn(pre + "attn.w_o", l.w_o);
    fn(pre + "attn.b_o", l.b_o);
    fn(pre + "ln1.gain", l.ln1_gain);
    fn(pre + "ln1.bias", l.ln1_bias);
    fn(pre + "ff.w_1", l.w_ff1);
    fn(pre + "ff.b_1", l.b_ff1);
    fn(pre + "ff.w_2", l.w_ff2);
    fn(pre + "ff.b_2", l.b_ff2);
    fn(pre + "ln2.gain", l.ln2_gain);
    fn(pre + "ln2.bias", l.ln2_bias);
  }
  fn("head.w_c", head_w_c);
  fn("head.w_q", head_w_q);
  fn("head.w_k", head_w_k);
}

void Parameters::for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const {
  const_cast<Parameters*>(this)->for_each([&](const std::string& name, Matrix& m) { fn(name, m); });
}

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  z.for_each([](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

void Parameters::round_to_float() {
  for_each([](const std::string&, Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(static_cast<float>(m.data()[i]));
  });
}

Parameters& Parameters::operator+=(const Parameters& other) {
  std::vector<const Matrix*> rhs;
  other.for_each([&](const std::string&, const Matrix& m) { rhs.push_back(&m); });
  std::size_t k = 0;
  for_each([&](const std::string& name, Matrix& m) {
    if (k >= rhs.size() || rhs[k]->rows() != m.rows() || rhs[k]->cols() != m.cols())
      throw Error(ErrorKind::ShapeMismatch, "cannot add tensors at " + name);
    m += *rhs[k++];
  });
  return *this;
}

Parameters& Parameters::operator*=(double s) {
  for_each([s](const std::string&, Matrix& m) { m *= s; });
  return *this;
}

// ---------------------------------------------------------------------------
// Forward

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x))); }

double gelu_grad(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, ForwardTrace::LayerNormCache& cache) {
  const auto n = x.rows();
  const auto d = static_cast<double>(x.cols());
  cache.normalized.resize(n, x.cols());
  cache.inv_std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = x.row(i).sum() / d;
    const auto centered = (x.row(i).array() - mean).eval();
    const double var = centered.square().sum() / d;
    cache.inv_std(i) = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.normalized.row(i) = centered * cache.inv_std(i);
  }
  Matrix y = cache.normalized.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

void softmax_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

void check_ids(const ModelConfig& config, const std::vector<TokenId>& ids) {
  if (ids.empty()) throw Error(ErrorKind::LengthMismatch, "sequence must contain at least the ROOT token");
  if (ids.size() > config.max_len + 1)
    throw Error(ErrorKind::SequenceTooLong, std::to_string(ids.size() - 1) + " tokens exceed max_len " +
                                                std::to_string(config.max_len));
  for (TokenId id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size)
      throw Error(ErrorKind::InvalidConfig, "token id " + std::to_string(id) + " outside the vocabulary");
}

Matrix embed(const Parameters& params, const std::vector<TokenId>& ids) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  Matrix x(n, params.token_embedding.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    x.row(i) = params.token_embedding.row(ids[static_cast<std::size_t>(i)]) + params.position_embedding.row(i);
  return x;
}

// One backbone block; fills `cache` and returns the block output.
Matrix block_forward(const LayerParameters& l, const ModelConfig& config, const Matrix& x, ForwardTrace::Layer& cache) {
  const auto n = x.rows();
  const auto heads = static_cast<Eigen::Index>(config.n_heads);
  const auto dh = static_cast<Eigen::Index>(config.d_model / config.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.input = x;
  cache.q = affine(x, l.w_q, l.b_q);
  cache.k = affine(x, l.w_k, l.b_k);
  cache.v = affine(x, l.w_v, l.b_v);
  cache.context = Matrix::Zero(n, x.cols());
  cache.probs.assign(static_cast<std::size_t>(heads), Matrix());
  for (Eigen::Index h = 0; h < heads; ++h) {
    Matrix scores = cache.q.middleCols(h * dh, dh) * cache.k.middleCols(h * dh, dh).transpose() * scale;
    // Causal mask: position i attends to j <= i only.
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) scores(i, j) = -std::numeric_limits<double>::infinity();
    softmax_rows(scores);
    cache.context.middleCols(h * dh, dh) = scores * cache.v.middleCols(h * dh, dh);
    cache.probs[static_cast<std::size_t>(h)] = std::move(scores);
  }
  Matrix residual = x + affine(cache.context, l.w_o, l.b_o);
  cache.ln1_out = layer_norm(residual, l.ln1_gain, l.ln1_bias, cache.ln1);

  cache.ff_pre = affine(cache.ln1_out, l.w_ff1, l.b_ff1);
  cache.ff_act = cache.ff_pre.unaryExpr([](double v) { return gelu(v); });
  Matrix residual2 = cache.ln1_out + affine(cache.ff_act, l.w_ff2, l.b_ff2);
  return layer_norm(residual2, l.ln2_gain, l.ln2_bias, cache.ln2);
}

}  // namespace

ForwardTrace forward_trace(const Parameters& params, const ModelConfig& config, const std::vector<TokenId>& ids) {
  check_ids(config, ids);
  ForwardTrace tr;
  tr.ids = ids;
  Matrix x = embed(params, ids);
  tr.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) x = block_forward(params.layers[l], config, x, tr.layers[l]);
  tr.hidden = std::move(x);

  const auto t = static_cast<Eigen::Index>(ids.size()) - 1;
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.d_qk));
  tr.head_q = tr.hidden * params.head_w_q;
  tr.head_k = tr.hidden * params.head_w_k;
  tr.outputs.class_logits = tr.hidden.bottomRows(t) * params.head_w_c;
  tr.outputs.parent_logits = tr.head_q.bottomRows(t) * tr.head_k.transpose() * scale;
  return tr;
}

ModelOutputs forward(const Parameters& params, const ModelConfig& config, const std::vector<TokenId>& ids) {
  return forward_trace(params, config, ids).outputs;
}

std::vector<Matrix> hidden_states(const Parameters& params, const ModelConfig& config,
                                  const std::vector<TokenId>& ids) {
  check_ids(config, ids);
  std::vector<Matrix> out{embed(params, ids)};
  ForwardTrace::Layer cache;
  for (const auto& l : params.layers) out.push_back(block_forward(l, config, out.back(), cache));
  return out;
}

// ---------------------------------------------------------------------------
// Loss

LossValue loss(const ModelOutputs& outputs, const TaggedSentence& target, double lambda) {
  const std::size_t t = outputs.length();
  if (target.size() != t)
    throw Error(ErrorKind::LengthMismatch, "target has " + std::to_string(target.size()) + " tokens, outputs have " +
                                               std::to_string(t));
  if (outputs.parent_logits.rows() != static_cast<Eigen::Index>(t) ||
      outputs.parent_logits.cols() != static_cast<Eigen::Index>(t + 1))
    throw Error(ErrorKind::LengthMismatch, "parent logits must be T x (T+1)");

  LossValue v;
  v.d_class_logits = Matrix::Zero(outputs.class_logits.rows(), outputs.class_logits.cols());
  v.d_parent_logits = Matrix::Zero(outputs.parent_logits.rows(), outputs.parent_logits.cols());
  if (t == 0) return v;

  auto cross_entropy = [](const auto& logits, Eigen::Index gold, auto&& grad_row, double weight) {
    const double mx = logits.maxCoeff();
    const Eigen::RowVectorXd e = (logits.array() - mx).exp();
    const double z = e.sum();
    grad_row = e / z * weight;
    grad_row(gold) -= weight;
    return std::log(z) + mx - logits(gold);
  };

  for (std::size_t i = 0; i < t; ++i) {
    const auto gold = static_cast<Eigen::Index>(target.tokens[i].node_type);
    const auto row = static_cast<Eigen::Index>(i);
    v.class_loss += cross_entropy(outputs.class_logits.row(row), gold, v.d_class_logits.row(row), 1.0 / static_cast<double>(t));
    if (target.tokens[i].node_type != NodeType::None) ++v.parent_terms;
  }
  v.class_loss /= static_cast<double>(t);

  if (v.parent_terms > 0) {
    const double w = lambda / static_cast<double>(v.parent_terms);
    for (std::size_t i = 0; i < t; ++i) {
      const auto& tok = target.tokens[i];
      if (tok.node_type == NodeType::None) continue;
      if (tok.parent > t) throw Error(ErrorKind::LengthMismatch, "target parent beyond sentence length");
      const auto row = static_cast<Eigen::Index>(i);
      v.parent_loss += cross_entropy(outputs.parent_logits.row(row), static_cast<Eigen::Index>(tok.parent),
                                     v.d_parent_logits.row(row), w);
    }
    v.parent_loss /= static_cast<double>(v.parent_terms);
  }
  v.total = v.class_loss + lambda * v.parent_loss;
  return v;
}

// ---------------------------------------------------------------------------
// Backward

namespace {

Matrix layer_norm_backward(const Matrix& dy, const Matrix& gain, const ForwardTrace::LayerNormCache& cache,
                           Matrix& d_gain, Matrix& d_bias) {
  const Matrix& xhat = cache.normalized;
  d_gain.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
  d_bias.row(0) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
  const double d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double sum = dxhat.row(i).sum();
    const double dot = dxhat.row(i).dot(xhat.row(i));
    dx.row(i) = (dxhat.row(i).array() * d - sum - xhat.row(i).array() * dot) * (cache.inv_std(i) / d);
  }
  return dx;
}

void affine_backward(const Matrix& x, const Matrix& dy, Matrix& dw, Matrix& db) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
}

Matrix block_backward(const LayerParameters& l, LayerParameters& g, const ModelConfig& config,
                      const ForwardTrace::Layer& c, const Matrix& d_out) {
  const auto heads = static_cast<Eigen::Index>(config.n_heads);
  const auto dh = static_cast<Eigen::Index>(config.d_model / config.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Matrix d_res2 = layer_norm_backward(d_out, l.ln2_gain, c.ln2, g.ln2_gain, g.ln2_bias);
  affine_backward(c.ff_act, d_res2, g.w_ff2, g.b_ff2);
  Matrix d_ff_pre = d_res2 * l.w_ff2.transpose();
  d_ff_pre.array() *= c.ff_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
  affine_backward(c.ln1_out, d_ff_pre, g.w_ff1, g.b_ff1);
  const Matrix d_ln1_out = d_res2 + d_ff_pre * l.w_ff1.transpose();

  const Matrix d_res1 = layer_norm_backward(d_ln1_out, l.ln1_gain, c.ln1, g.ln1_gain, g.ln1_bias);
  affine_backward(c.context, d_res1, g.w_o, g.b_o);
  const Matrix d_context = d_res1 * l.w_o.transpose();

  Matrix dq = Matrix::Zero(c.q.rows(), c.q.cols());
  Matrix dk = Matrix::Zero(c.k.rows(), c.k.cols());
  Matrix dv = Matrix::Zero(c.v.rows(), c.v.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    const Matrix& p = c.probs[static_cast<std::size_t>(h)];
    const auto d_ctx = d_context.middleCols(h * dh, dh);
    const Matrix dp = d_ctx * c.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh) = p.transpose() * d_ctx;
    const Eigen::VectorXd row_dot = (dp.array() * p.array()).rowwise().sum();
    const Matrix ds = p.array() * (dp.array().colwise() - row_dot.array());
    dq.middleCols(h * dh, dh) = ds * c.k.middleCols(h * dh, dh) * scale;
    dk.middleCols(h * dh, dh) = ds.transpose() * c.q.middleCols(h * dh, dh) * scale;
  }
  affine_backward(c.input, dq, g.w_q, g.b_q);
  affine_backward(c.input, dk, g.w_k, g.b_k);
  affine_backward(c.input, dv, g.w_v, g.b_v);
  return d_res1 + dq * l.w_q.transpose() + dk * l.w_k.transpose() + dv * l.w_v.transpose();
}

}  // namespace

Parameters backward(const Parameters& params, const ModelConfig& config, const ForwardTrace& tr,
                    const Matrix& d_class_logits, const Matrix& d_parent_logits) {
  Parameters g = params.zeros_like();
  const auto n = tr.hidden.rows();
  const auto t = n - 1;
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.d_qk));

  Matrix dh = Matrix::Zero(n, tr.hidden.cols());
  const auto h_tail = tr.hidden.bottomRows(t);
  g.head_w_c.noalias() += h_tail.transpose() * d_class_logits;
  dh.bottomRows(t) += d_class_logits * params.head_w_c.transpose();

  Matrix d_head_q = Matrix::Zero(n, tr.head_q.cols());
  d_head_q.bottomRows(t) = d_parent_logits * tr.head_k * scale;
  const Matrix d_head_k = d_parent_logits.transpose() * tr.head_q.bottomRows(t) * scale;
  g.head_w_q.noalias() += tr.hidden.transpose() * d_head_q;
  g.head_w_k.noalias() += tr.hidden.transpose() * d_head_k;
  dh += d_head_q * params.head_w_q.transpose() + d_head_k * params.head_w_k.transpose();

  for (std::size_t l = params.layers.size(); l-- > 0;)
    dh = block_backward(params.layers[l], g.layers[l], config, tr.layers[l], dh);

  for (Eigen::Index i = 0; i < n; ++i) {
    g.token_embedding.row(tr.ids[static_cast<std::size_t>(i)]) += dh.row(i);
    g.position_embedding.row(i) += dh.row(i);
  }
  return g;
}

LossAndGradients loss_and_gradients(const Parameters& params, const ModelConfig& config,
                                    const std::vector<TokenId>& ids, const TaggedSentence& target, double lambda) {
  ForwardTrace tr = forward_trace(params, config, ids);
  LossValue v = loss(tr.outputs, target, lambda);
  Parameters g = backward(params, config, tr, v.d_class_logits, v.d_parent_logits);
  return {std::move(v), std::move(g)};
}

// ---------------------------------------------------------------------------
// Targets and prediction

TaggedSentence expand_target(const TaggedSentence& words, const TokenSequence& seq) {
  if (words.size() != seq.word_heads.size())
    throw Error(ErrorKind::LengthMismatch, "target has " + std::to_string(words.size()) + " words, text has " +
                                               std::to_string(seq.word_heads.size()));
  TaggedSentence out;
  std::size_t next = 1;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const TaggedToken& word = words.tokens[w];
    const std::size_t head = seq.word_heads[w];
    const bool none = word.node_type == NodeType::None;
    for (; next < head; ++next)
      out.tokens.push_back({next, seq.pieces[next], none ? NodeType::None : NodeType::Same, none ? kRoot : head});
    Position parent = kRoot;
    if (!none && word.parent != kRoot) {
      if (word.parent > seq.word_heads.size()) throw Error(ErrorKind::LengthMismatch, "target parent beyond sentence");
      parent = seq.word_heads[word.parent - 1];
    }
    out.tokens.push_back({head, seq.pieces[head], word.node_type, parent});
    next = head + 1;
  }
  return out;
}

TaggedSentence read_outputs(const ModelOutputs& outputs, const TokenSequence& seq) {
  const std::size_t t = outputs.length();
  TaggedSentence out;
  // Parent candidates: ROOT then every in-range word head, ascending.
  std::vector<std::pair<std::size_t, Position>> candidates{{0, kRoot}};
  for (std::size_t w = 0; w < seq.word_heads.size(); ++w)
    if (seq.word_heads[w] <= t) candidates.emplace_back(seq.word_heads[w], w + 1);

  for (std::size_t w = 0; w < seq.words.size(); ++w) {
    const std::size_t head = seq.word_heads[w];
    TaggedToken tok{w + 1, seq.words[w], NodeType::None, kRoot};
    if (head <= t && head > 0) {
      const auto row = static_cast<Eigen::Index>(head - 1);
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < outputs.class_logits.cols(); ++k)
        if (outputs.class_logits(row, k) > outputs.class_logits(row, best)) best = k;
      tok.node_type = static_cast<NodeType>(best);
      if (tok.node_type != NodeType::None) {
        auto top = candidates.front();
        for (const auto& c : candidates)
          if (outputs.parent_logits(row, static_cast<Eigen::Index>(c.first)) >
              outputs.parent_logits(row, static_cast<Eigen::Index>(top.first)))
            top = c;
        tok.parent = top.second;
      }
    }
    out.tokens.push_back(std::move(tok));
  }
  return out;
}

TaggedSentence predict(const Parameters& params, const ModelConfig& config, const Tokenizer& tokenizer,
                       std::string_view text) {
  TokenSequence seq = tokenizer.tokenize(text);
  if (seq.words.empty()) return {};
  std::vector<TokenId> ids = seq.ids;
  if (ids.size() > config.max_len + 1) ids.resize(config.max_len + 1);
  return read_outputs(forward(params, config, ids), seq);
}

}  // namespace sgforge
