#include "sgforge/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "sgforge/error.hpp"
#include "sgforge/evaluator.hpp"

namespace sgforge {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (!(learning_rate > 0)) fail("learning_rate must be positive");
  if (!(adam_beta1 > 0 && adam_beta1 < 1) || !(adam_beta2 > 0 && adam_beta2 < 1))
    fail("adam betas must lie strictly between 0 and 1");
  if (!(adam_epsilon > 0)) fail("adam_epsilon must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (lambda_mode == LambdaMode::Fixed && !(lambda_value >= 0)) fail("lambda must be non-negative");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"learning_rate", learning_rate}, {"adam_beta1", adam_beta1}, {"adam_beta2", adam_beta2},
                      {"adam_epsilon", adam_epsilon},   {"epochs", epochs},         {"batch_size", batch_size},
                      {"seed", seed}};
  if (lambda_mode == LambdaMode::Auto) j["lambda"] = "auto";
  else j["lambda"] = lambda_value;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "train config must be a JSON object");
  TrainConfig c;
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    if (j.contains("lambda")) {
      const auto& l = j["lambda"];
      if (l.is_string() && l.get<std::string>() == "auto") {
        c.lambda_mode = LambdaMode::Auto;
      } else if (l.is_number()) {
        c.lambda_mode = LambdaMode::Fixed;
        c.lambda_value = l.get<double>();
      } else {
        throw Error(ErrorKind::InvalidConfig, "lambda must be \"auto\" or a number");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamState& state,
               const TrainConfig& config) {
  if (params.size() != grads.size())
    throw Error(ErrorKind::ShapeMismatch, "parameter and gradient counts differ");
  if (state.m.empty() && state.step == 0) {
    for (const Matrix* p : params) {
      state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw Error(ErrorKind::ShapeMismatch, "optimizer state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto r = params[i]->rows(), c = params[i]->cols();
    if (grads[i]->rows() != r || grads[i]->cols() != c || state.m[i].rows() != r || state.m[i].cols() != c)
      throw Error(ErrorKind::ShapeMismatch, "tensor " + std::to_string(i) + " shape mismatch");
  }

  ++state.step;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = grads[i]->array();
    auto m = state.m[i].array();
    auto v = state.v[i].array();
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.square();
    params[i]->array() -= config.learning_rate * (m / c1) / ((v / c2).sqrt() + config.adam_epsilon);
  }
}

void adam_step(Parameters& params, const Parameters& grads, AdamState& state, const TrainConfig& config) {
  std::vector<Matrix*> p;
  std::vector<const Matrix*> g;
  params.for_each([&](const std::string&, Matrix& m) { p.push_back(&m); });
  grads.for_each([&](const std::string&, const Matrix& m) { g.push_back(&m); });
  adam_step(std::span<Matrix* const>(p), std::span<const Matrix* const>(g), state, config);
}

// ---------------------------------------------------------------------------

namespace {

struct Prepared {
  std::vector<TokenId> ids;
  TaggedSentence target;  // token level
};

std::optional<Prepared> prepare(const Example& ex, const ModelConfig& config, const Tokenizer& tokenizer) {
  TokenSequence seq = tokenizer.tokenize(ex.description);
  if (seq.words.empty() || seq.length() > config.max_len + 1) return std::nullopt;
  return Prepared{seq.ids, expand_target(ex.target, seq)};
}

}  // namespace

double lambda_from_means(double class_mean, double parent_mean) {
  return parent_mean == 0.0 ? 1.0 : class_mean / parent_mean;
}

double calibrate_lambda(const Parameters& params, const ModelConfig& config, const Tokenizer& tokenizer,
                        std::span<const Example> batch) {
  double class_sum = 0, parent_sum = 0;
  std::size_t n_class = 0, n_parent = 0;
  for (const auto& ex : batch) {
    auto prepared = prepare(ex, config, tokenizer);
    if (!prepared) continue;
    LossValue v = loss(forward(params, config, prepared->ids), prepared->target, 1.0);
    class_sum += v.class_loss;
    ++n_class;
    if (v.parent_terms > 0) {
      parent_sum += v.parent_loss;
      ++n_parent;
    }
  }
  if (n_class == 0) return 1.0;
  return lambda_from_means(class_sum / static_cast<double>(n_class),
                           n_parent == 0 ? 0.0 : parent_sum / static_cast<double>(n_parent));
}

nlohmann::ordered_json EpochLog::to_json() const {
  nlohmann::ordered_json j = {{"epoch", epoch}, {"steps", steps}, {"train_loss", train_loss}};
  j["dev_loss"] = dev_loss ? nlohmann::ordered_json(*dev_loss) : nlohmann::ordered_json(nullptr);
  j["dev_f"] = dev_f ? nlohmann::ordered_json(*dev_f) : nlohmann::ordered_json(nullptr);
  j["lambda"] = lambda;
  return j;
}

double mean_loss(const Parameters& params, const ModelConfig& config, const Tokenizer& tokenizer,
                 std::span<const Example> examples) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& ex : examples) {
    auto prepared = prepare(ex, config, tokenizer);
    if (!prepared) continue;
    sum += loss(forward(params, config, prepared->ids), prepared->target, config.loss_weight).total;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double corpus_f1(const Parameters& params, const ModelConfig& config, const Tokenizer& tokenizer,
                 std::span<const Example> examples) {
  std::vector<PredictedGraph> predicted;
  std::vector<Region> reference;
  for (const auto& ex : examples) {
    TaggedSentence tags = predict(params, config, tokenizer, ex.description);
    predicted.push_back({ex.region_id, decode_tags_to_graph(tags).graph});
    reference.push_back({0, ex.region_id, ex.description, ex.reference});
  }
  return evaluate_corpus(predicted, reference, Lexicon{}, CorpusMode::Base).aggregate.f1;
}

TrainResult train(const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                  ModelConfig model_config, const TrainConfig& train_config, const Tokenizer& tokenizer,
                  std::ostream* log) {
  train_config.validate();
  model_config.vocab_size = tokenizer.vocab().size();
  model_config.tokenizer_mode = tokenizer.mode();
  model_config.validate();

  TrainResult result;
  std::vector<Prepared> data;
  std::vector<const Example*> sources;
  for (const auto& ex : train_set) {
    if (auto p = prepare(ex, model_config, tokenizer)) {
      data.push_back(std::move(*p));
      sources.push_back(&ex);
    } else {
      ++result.skipped_too_long;
    }
  }
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "no training example fits the model");

  std::mt19937_64 rng(train_config.seed);
  Parameters params = Parameters::initialize(model_config, rng);
  params.round_to_float();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t batch = std::min(train_config.batch_size, data.size());
  if (train_config.lambda_mode == TrainConfig::LambdaMode::Auto) {
    std::vector<Example> first;
    for (std::size_t i = 0; i < batch; ++i) first.push_back(*sources[order[i]]);
    model_config.loss_weight = calibrate_lambda(params, model_config, tokenizer, first);
  } else {
    model_config.loss_weight = train_config.lambda_value;
  }

  auto snapshot = [&](std::uint64_t step, nlohmann::json metrics) {
    return Checkpoint{model_config, train_config.to_json(), tokenizer, params, step, std::move(metrics)};
  };
  result.final_checkpoint = snapshot(0, {{"lambda", model_config.loss_weight}});
  result.best_checkpoint = result.final_checkpoint;

  AdamState adam;
  std::optional<double> best_f;
  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    if (epoch > 1) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(start + batch, order.size());
      Parameters grads = params.zeros_like();
      for (std::size_t k = start; k < end; ++k) {
        const Prepared& ex = data[order[k]];
        auto lg = loss_and_gradients(params, model_config, ex.ids, ex.target, model_config.loss_weight);
        grads += lg.gradients;
        loss_sum += lg.value.total;
      }
      grads *= 1.0 / static_cast<double>(end - start);
      adam_step(params, grads, adam, train_config);
      params.round_to_float();
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.steps = adam.step;
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    entry.lambda = model_config.loss_weight;
    if (!dev_set.empty()) {
      entry.dev_loss = mean_loss(params, model_config, tokenizer, dev_set);
      entry.dev_f = corpus_f1(params, model_config, tokenizer, dev_set);
    }
    if (log) *log << entry.to_json().dump() << std::endl;

    nlohmann::json metrics = {{"epoch", epoch}, {"train_loss", entry.train_loss}, {"lambda", entry.lambda}};
    if (entry.dev_f) {
      metrics["dev_loss"] = *entry.dev_loss;
      metrics["dev_f"] = *entry.dev_f;
    }
    result.final_checkpoint = snapshot(adam.step, metrics);
    if (!entry.dev_f || !best_f || *entry.dev_f > *best_f) {
      if (entry.dev_f) best_f = entry.dev_f;
      result.best_checkpoint = result.final_checkpoint;
    }
    result.epochs.push_back(entry);
  }
  return result;
}

}  // namespace sgforge
