#include <benchmark/benchmark.h>

#include <random>

#include "sgforge/aligner.hpp"
#include "sgforge/corpus.hpp"
#include "sgforge/evaluator.hpp"
#include "sgforge/model.hpp"
#include "sgforge/tags.hpp"

using namespace sgforge;

namespace {

ModelConfig desk_config() {
  ModelConfig c;
  c.vocab_size = 64;
  return c;
}

std::vector<TokenId> ids_of_length(std::size_t t) {
  std::vector<TokenId> ids{Vocabulary::kRoot};
  for (std::size_t i = 0; i < t; ++i) ids.push_back(static_cast<TokenId>(4 + i % 60));
  return ids;
}

TaggedSentence random_sentence(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::tuple<std::string, NodeType, Position>> rows;
  for (std::size_t i = 0; i < n; ++i) rows.emplace_back("w" + std::to_string(i), kAllNodeTypes[rng() % 6], rng() % (n + 1));
  return TaggedSentence::from(rows);
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const ModelConfig c = desk_config();
  std::mt19937_64 rng(1);
  const Parameters p = Parameters::initialize(c, rng);
  const auto ids = ids_of_length(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, c, ids));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_LossAndGradients(benchmark::State& state) {
  const ModelConfig c = desk_config();
  std::mt19937_64 rng(2);
  const Parameters p = Parameters::initialize(c, rng);
  const std::size_t t = static_cast<std::size_t>(state.range(0));
  const auto ids = ids_of_length(t);
  const TaggedSentence target = random_sentence(rng, t);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradients(p, c, ids, target, 1.0));
}
BENCHMARK(BM_LossAndGradients)->Arg(8)->Arg(16);

static void BM_Decode(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<TaggedSentence> sentences;
  for (int i = 0; i < 256; ++i) sentences.push_back(random_sentence(rng, static_cast<std::size_t>(state.range(0))));
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(decode_tags_to_graph(sentences[k++ % sentences.size()]));
}
BENCHMARK(BM_Decode)->Arg(6)->Arg(12)->Arg(32);

static void BM_Align(benchmark::State& state) {
  const auto regions = generate_synthetic(SyntheticGrammar::default_grammar(), 256);
  std::size_t k = 0;
  for (auto _ : state) {
    const Region& r = regions[k++ % regions.size()];
    benchmark::DoNotOptimize(align(r.description, r.graph));
  }
}
BENCHMARK(BM_Align);

static void BM_SpiceF1(benchmark::State& state) {
  const auto regions = generate_synthetic(SyntheticGrammar::default_grammar(), 256);
  std::vector<TupleSet> tuples;
  for (const auto& r : regions) tuples.push_back(extract_tuples(r.graph));
  Lexicon lex;
  lex.add("man", "person");
  std::size_t k = 0;
  for (auto _ : state) {
    const TupleSet& a = tuples[k % tuples.size()];
    const TupleSet& b = tuples[(k * 7 + 3) % tuples.size()];
    ++k;
    benchmark::DoNotOptimize(spice_f1(a, b, lex, ScoringMode::limited(4)));
  }
}
BENCHMARK(BM_SpiceF1);
BENCHMARK_MAIN();
