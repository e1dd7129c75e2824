// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sgforge/aligner.hpp"
#include "sgforge/checkpoint.hpp"
#include "sgforge/corpus.hpp"
#include "sgforge/evaluator.hpp"
#include "sgforge/model.hpp"
#include "sgforge/tags.hpp"
#include "sgforge/trainer.hpp"

using namespace sgforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %s  %s  [%s] (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Example> examples_from(const std::vector<Region>& regions) {
  std::vector<Example> out;
  out.reserve(regions.size());
  for (const auto& r : regions) out.push_back({r.region_id, r.description, align(r.description, r.graph).tagged, r.graph});
  return out;
}

Tokenizer tokenizer_for(const std::vector<Example>& xs) {
  std::vector<std::string> d;
  for (const auto& x : xs) d.push_back(x.description);
  return Tokenizer::fit(d, TokenizerMode::Word);
}

std::vector<Matrix*> tensors(Parameters& p) {
  std::vector<Matrix*> out;
  p.for_each([&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

std::vector<std::string> tensor_names(const Parameters& p) {
  std::vector<std::string> out;
  p.for_each([&](const std::string& n, const Matrix&) { out.push_back(n); });
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<Region>& synthetic_corpus() {
  static const std::vector<Region> regions = [] {
    SyntheticGrammar g = SyntheticGrammar::default_grammar();
    g.seed = 17;
    return generate_synthetic(g, 2000);
  }();
  return regions;
}

// Shared with A8: the trained checkpoint from A2.
std::optional<Checkpoint> a2_checkpoint;

Outcome gradient_check() {
  ModelConfig c;
  c.vocab_size = 14;
  c.d_model = 16;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_ff = 32;
  c.d_qk = 8;
  c.max_len = 8;
  std::mt19937_64 rng(101);
  Parameters params = Parameters::initialize(c, rng);
  // Larger weights than the initializer so every block contributes visibly.
  std::normal_distribution<double> wide(0.0, 0.3);
  params.for_each([&](const std::string& name, Matrix& m) {
    if (name.find("gain") == std::string::npos) m = Matrix::NullaryExpr(m.rows(), m.cols(), [&] { return wide(rng); });
  });

  const std::vector<TokenId> ids = {0, 5, 9, 4, 12, 7, 5};  // T = 6
  using NT = NodeType;
  const TaggedSentence target = TaggedSentence::from({{"a", NT::Attr, 2},
                                                      {"b", NT::Subj, 0},
                                                      {"c", NT::Same, 4},
                                                      {"d", NT::Pred, 2},
                                                      {"e", NT::None, 0},
                                                      {"f", NT::Objt, 4}});
  const double lambda = 0.7;
  const LossAndGradients lg = loss_and_gradients(params, c, ids, target, lambda);
  Parameters grads = lg.gradients;
  auto analytic = tensors(grads);
  auto values = tensors(params);
  const auto names = tensor_names(params);

  const double h = 1e-5;
  double worst = 0, worst_abs = 0;
  std::size_t vanishing = 0;
  std::string worst_name;
  for (std::size_t t = 0; t < values.size(); ++t) {
    Matrix& m = *values[t];
    Matrix fd(m.rows(), m.cols());
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const double saved = m.data()[k];
      m.data()[k] = saved + h;
      const double up = loss(forward(params, c, ids), target, lambda).total;
      m.data()[k] = saved - h;
      const double down = loss(forward(params, c, ids), target, lambda).total;
      m.data()[k] = saved;
      fd.data()[k] = (up - down) / (2 * h);
    }
    // Key biases shift every score of a softmax row equally, so their true
    // gradient is zero and the difference quotient is pure rounding noise.
    const double scale = std::max(analytic[t]->norm(), fd.norm());
    if (scale < 1e-6) {
      ++vanishing;
      worst_abs = std::max(worst_abs, (*analytic[t] - fd).cwiseAbs().maxCoeff());
      continue;
    }
    const double rel = (*analytic[t] - fd).norm() / scale;
    if (rel >= worst) {
      worst = rel;
      worst_name = names[t];
    }
  }
  return {worst < 1e-4 && worst_abs < 1e-8,
          fmt("%zu tensors, %zu values; worst relative error %.2e (%s); %zu vanishing tensors, max abs diff %.1e",
              values.size(), params.count(), worst, worst_name.c_str(), vanishing, worst_abs)};
}

Outcome end_to_end_learning() {
  const auto& regions = synthetic_corpus();
  const SplitSpec spec = make_split(regions, 0.1, 17);
  const SplitResult parts = split(regions, spec);
  const auto train_set = examples_from(parts.train);
  const auto dev_set = examples_from(parts.eval);
  const Tokenizer tok = tokenizer_for(train_set);

  const ModelConfig model_config;  // desk defaults
  const TrainConfig train_config;
  if (train_config.epochs != 4) return {false, "desk default is not 4 epochs"};
  const TrainResult result = train(train_set, dev_set, model_config, train_config, tok);
  const Checkpoint& ck = result.final_checkpoint;
  a2_checkpoint = ck;

  // Score the final model with the evaluator directly.
  std::vector<PredictedGraph> predicted;
  for (const auto& r : parts.eval)
    predicted.push_back({r.region_id, decode_tags_to_graph(predict(ck.params, ck.model_config, ck.tokenizer, r.description)).graph});
  const CorpusReport rep = evaluate_corpus(predicted, parts.eval, {}, CorpusMode::Base);
  const double f = rep.aggregate.f1;
  return {f >= 0.90, fmt("train %zu / dev %zu regions, %zu steps, lambda %.4f, dev F %.4f (>= 0.90)", train_set.size(),
                         dev_set.size(), static_cast<std::size_t>(ck.step), result.epochs.front().lambda, f)};
}

Outcome oracle_round_trip() {
  const auto& regions = synthetic_corpus();
  std::vector<PredictedGraph> decoded;
  std::size_t dropped = 0;
  for (const auto& r : regions) {
    const DecodeReport d = decode_tags_to_graph(align(r.description, r.graph).tagged);
    dropped += d.dropped_arcs.size();
    decoded.push_back({r.region_id, d.graph});
  }
  const CorpusReport rep = evaluate_corpus(decoded, regions, {}, CorpusMode::Base);
  std::size_t imperfect = 0;
  for (const auto& s : rep.regions) imperfect += s.scores.f1 != 1.0;
  return {rep.aggregate.f1 == 1.0 && imperfect == 0 && rep.regions.size() == regions.size(),
          fmt("%zu regions, aggregate F %.17g, %zu imperfect, %zu dropped arcs", rep.regions.size(), rep.aggregate.f1,
              imperfect, dropped)};
}

Outcome limited_dominance() {
  std::mt19937_64 rng(404);
  const std::vector<std::string> labels = {"man", "dog", "red", "on", "near", "big"};
  Lexicon lex;
  lex.add("man", "dog");
  lex.add("red", "big");
  std::size_t violations = 0, raised = 0;
  for (int i = 0; i < 1000; ++i) {
    const TupleSet p = testing::random_tuples(rng, 10, labels);
    const TupleSet r = testing::random_tuples(rng, 10, labels);
    const std::size_t cap = rng() % 12;
    const Lexicon& l = (i % 2 == 0) ? lex : Lexicon{};
    const double base = spice_f1(p, r, l).f1;
    const double lim = spice_f1(p, r, l, ScoringMode::limited(cap)).f1;
    violations += lim < base;
    raised += lim > base;
  }
  return {violations == 0, fmt("1000 cases, %zu violations, %zu strictly raised", violations, raised)};
}

Outcome decoder_totality() {
  std::mt19937_64 rng(505);
  std::size_t illegal = 0, missed_cycles = 0, cycles = 0, arcs = 0, failures_seen = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<std::tuple<std::string, NodeType, Position>> rows;
    for (std::size_t i = 0; i < n; ++i) rows.emplace_back("w" + std::to_string(i), kAllNodeTypes[rng() % 6], rng() % (n + 1));
    const TaggedSentence s = TaggedSentence::from(rows);
    DecodeReport d;
    try {
      d = decode_tags_to_graph(s);
    } catch (...) {
      ++failures_seen;
      continue;
    }
    auto type_at = [&](ObjectId id) { return s.at(static_cast<Position>(id)).node_type; };
    for (const auto& o : d.graph.objects()) {
      const NodeType t = type_at(o.id);
      illegal += t != NodeType::Subj && t != NodeType::Objt;
    }
    for (const auto& a : d.graph.attributes()) {
      ++arcs;
      illegal += !arc_legal(NodeType::Attr, ParentKind::Of(type_at(a.object)));
    }
    for (const auto& r : d.graph.relations()) {
      arcs += 2;
      const auto obj = static_cast<Position>(r.object);
      const auto pred = testing::resolve_parent(s, s.at(obj).parent);
      bool ok = s.at(obj).node_type == NodeType::Objt && pred && *pred != kRoot && *pred <= n;
      if (ok) {
        ok = arc_legal(NodeType::Objt, ParentKind::Of(s.at(*pred).node_type));
        const auto subj = testing::resolve_parent(s, s.at(*pred).parent);
        ok = ok && subj && *subj == static_cast<Position>(r.subject) &&
             arc_legal(NodeType::Pred, ParentKind::Of(type_at(r.subject)));
      }
      illegal += !ok;
    }
    for (const auto& t : s.tokens) {
      if (t.node_type != NodeType::Same || !testing::walk_same(s, t.index).cycle) continue;
      ++cycles;
      missed_cycles += !testing::dropped(d, t.index);
    }
  }
  return {failures_seen == 0 && illegal == 0 && missed_cycles == 0,
          fmt("10000 sentences, %zu arcs checked, %zu illegal, %zu SAME cycles, %zu missed, %zu decode failures", arcs,
              illegal, cycles, missed_cycles, failures_seen)};
}

Outcome masking_exactness() {
  std::mt19937_64 rng(606);
  std::normal_distribution<double> noise(0.0, 5.0);
  std::size_t changed = 0, trials = 0;
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index t = 1 + static_cast<Eigen::Index>(rng() % 12);
    ModelOutputs out;
    out.class_logits = Matrix::NullaryExpr(t, 6, [&] { return noise(rng); });
    out.parent_logits = Matrix::NullaryExpr(t, t + 1, [&] { return noise(rng); });
    std::vector<std::tuple<std::string, NodeType, Position>> rows;
    for (Eigen::Index i = 0; i < t; ++i) rows.emplace_back("w", NodeType::None, 0);
    const TaggedSentence target = TaggedSentence::from(rows);
    const double base = loss(out, target, 1.3).total;
    for (int j = 0; j < 20; ++j) {
      ModelOutputs moved = out;
      moved.parent_logits += Matrix::NullaryExpr(t, t + 1, [&] { return noise(rng); });
      ++trials;
      changed += loss(moved, target, 1.3).total - base != 0.0;
    }
  }

  // Through the model: parent-head weights receive exactly zero gradient.
  ModelConfig c;
  c.vocab_size = 10;
  c.d_model = 16;
  c.n_heads = 2;
  c.d_ff = 32;
  c.d_qk = 8;
  c.max_len = 8;
  std::mt19937_64 init(7);
  const Parameters p = Parameters::initialize(c, init);
  const TaggedSentence none = TaggedSentence::from({{"a", NodeType::None, 0}, {"b", NodeType::None, 0}, {"c", NodeType::None, 0}});
  const LossAndGradients lg = loss_and_gradients(p, c, {0, 4, 5, 6}, none, 2.0);
  const bool head_zero = lg.gradients.head_w_q.isZero(0.0) && lg.gradients.head_w_k.isZero(0.0);
  return {changed == 0 && head_zero, fmt("%zu perturbations, %zu changed the loss; parent-head gradient %s", trials, changed,
                                         head_zero ? "exactly zero" : "NON-ZERO")};
}

Outcome worked_metric_values() {
  TupleSet pred, ref;
  pred.unary = {"bus"};
  pred.binary = {{"bus", "red"}, {"bus", "blue"}};
  ref.unary = {"bus"};
  ref.binary = {{"bus", "red"}, {"bus", "passenger"}, {"bus", "black"}, {"bus", "white"}};
  const double base = spice_f1(pred, ref, {}).f1;
  const double lim = spice_f1(pred, ref, {}, ScoringMode::limited(useful_word_count("blue and red bus"))).f1;
  const bool values_ok = base == 0.5 && std::abs(lim - 2.0 / 3.0) <= 1e-15;

  std::mt19937_64 rng(707);
  const std::vector<std::string> labels = {"a", "b", "c", "d", "e"};
  Lexicon groups;
  groups.add("a", "b");
  groups.add("c", "d");
  std::size_t instances = 0, mismatches = 0;
  for (int i = 0; i < 3000; ++i) {
    const TupleSet p = testing::random_tuples(rng, 8, labels);
    const TupleSet r = testing::random_tuples(rng, 8, labels);
    const Lexicon none;
    for (const Lexicon* lex_ptr : {&none, static_cast<const Lexicon*>(&groups)}) {
      const Lexicon& lex = *lex_ptr;
      ++instances;
      mismatches += greedy_match_count(p, r, lex) !=
                    testing::brute_force_max_matching(testing::tuples_of(p), testing::tuples_of(r), lex);
    }
  }
  return {values_ok && mismatches == 0, fmt("base F %.17g, limited(3) F %.17g; greedy vs exhaustive on %zu instances: %zu differ",
                                            base, lim, instances, mismatches)};
}

Outcome format_round_trips() {
  // CONLL.
  std::vector<TaggedSentence> sentences;
  for (const auto& r : synthetic_corpus()) sentences.push_back(align(r.description, r.graph).tagged);
  const std::string conll = write_conll(sentences);
  const bool conll_ok = write_conll(read_conll(conll)) == conll && read_conll(conll) == sentences;

  // Checkpoint: the trained model from A2 when available.
  Checkpoint ck;
  if (a2_checkpoint) {
    ck = *a2_checkpoint;
  } else {
    const auto xs = examples_from(std::vector<Region>(synthetic_corpus().begin(), synthetic_corpus().begin() + 100));
    TrainConfig tc;
    tc.epochs = 1;
    ck = train(xs, {}, ModelConfig{}, tc, tokenizer_for(xs)).final_checkpoint;
  }
  const fs::path dir = fs::temp_directory_path() / ("sgforge_accept_" + std::to_string(std::random_device{}()));
  save_checkpoint(ck, (dir / "a").string());
  const Checkpoint loaded = load_checkpoint((dir / "a").string());
  save_checkpoint(loaded, (dir / "b").string());
  bool ckpt_ok = slurp(dir / "a" / kManifestFile) == slurp(dir / "b" / kManifestFile) &&
                 slurp(dir / "a" / kTensorFile) == slurp(dir / "b" / kTensorFile);
  for (std::size_t i = 0; i < 50 && ckpt_ok; ++i) {
    const auto ids = ck.tokenizer.tokenize(synthetic_corpus()[i].description).ids;
    const ModelOutputs x = forward(ck.params, ck.model_config, ids);
    const ModelOutputs y = forward(loaded.params, loaded.model_config, ids);
    ckpt_ok = x.class_logits == y.class_logits && x.parent_logits == y.parent_logits;
  }
  fs::remove_all(dir);

  // Seeded training, twice.
  const auto xs = examples_from(std::vector<Region>(synthetic_corpus().begin(), synthetic_corpus().begin() + 300));
  const Tokenizer tok = tokenizer_for(xs);
  ModelConfig mc;
  mc.d_model = 32;
  mc.d_ff = 64;
  mc.d_qk = 32;
  TrainConfig tc;
  tc.epochs = 2;
  std::string first, second;
  {
    nlohmann::json table;
    first = encode_tensors(train(xs, {}, mc, tc, tok).final_checkpoint.params, table);
    second = encode_tensors(train(xs, {}, mc, tc, tok).final_checkpoint.params, table);
  }
  const bool repro_ok = first == second && !first.empty();
  return {conll_ok && ckpt_ok && repro_ok,
          fmt("CONLL %zu sentences %s; checkpoint %s; seeded training %s", sentences.size(), conll_ok ? "byte-exact" : "DIFFERS",
              ckpt_ok ? "byte-exact, logits bit-exact" : "DIFFERS", repro_ok ? "bit-identical" : "DIFFERS")};
}

}  // namespace

int main() {
  report("A1", "gradient correctness", gradient_check);
  report("A2", "end-to-end learning", end_to_end_learning);
  report("A3", "oracle round-trip", oracle_round_trip);
  report("A4", "limited-mode dominance", limited_dominance);
  report("A5", "decoder totality and legality", decoder_totality);
  report("A6", "loss masking exactness", masking_exactness);
  report("A7", "worked metric values", worked_metric_values);
  report("A8", "format round-trips", format_round_trips);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
