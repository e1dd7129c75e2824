#pragma once

// SPICE-style tuple F-score between parsed and reference scene graphs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sgforge/corpus.hpp"
#include "sgforge/graph.hpp"
#include "sgforge/lexicon.hpp"

namespace sgforge {

struct Scores {
  std::size_t matches = 0;
  std::size_t num_pred = 0;
  std::size_t num_ref = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  /// P = m/pred, R = m/ref, F = 2PR/(P+R), each 0 when its denominator is 0.
  static Scores from_counts(std::size_t matches, std::size_t num_pred, std::size_t num_ref);
};

/// A tuple of arity 1 (object), 2 (object, attribute) or 3 (subject, predicate, object).
using Tuple = std::vector<std::string>;

/// Canonical iteration order: unary, binary, ternary, each lexicographic.
std::vector<Tuple> flatten(const TupleSet& tuples);

bool tuple_match(const Tuple& a, const Tuple& b, const Lexicon& lex);

struct ScoringMode {
  enum class Kind { Base, Limited };
  Kind kind = Kind::Base;
  std::size_t cap = 0;     // Limited only
  bool clamp_pred = false;  // Limited only: also cap the prediction side

  static ScoringMode base() { return {}; }
  static ScoringMode limited(std::size_t cap, bool clamp_pred = false) { return {Kind::Limited, cap, clamp_pred}; }
};

/// Greedy one-to-one matching size: exact pairs first, then synonym pairs,
/// both in canonical order.
std::size_t greedy_match_count(const TupleSet& pred, const TupleSet& ref, const Lexicon& lex);

/// Limited mode clamps num_ref to max(cap, 1) and recall to min(matches, num_ref);
/// precision keeps the unclamped match count unless clamp_pred is set.
Scores spice_f1(const TupleSet& pred, const TupleSet& ref, const Lexicon& lex, ScoringMode mode = ScoringMode::base());

struct PredictedGraph {
  std::int64_t region_id = 0;
  SceneGraph graph;
};

struct RegionScore {
  std::int64_t region_id = 0;
  Scores scores;
};

struct CorpusReport {
  std::vector<RegionScore> regions;  // scored regions, in reference order
  std::size_t skipped_empty_reference = 0;
  Scores aggregate;  // counts summed; precision/recall/f1 are per-region means

  nlohmann::ordered_json aggregate_json() const;
};

nlohmann::ordered_json to_json(const RegionScore& r);

enum class CorpusMode { Base, Limited };

/// Scores every reference region against the prediction with the same id.
/// Limited mode caps each region by the useful words of its description.
/// Throws Error(IdMismatch) when the two id sets differ.
CorpusReport evaluate_corpus(std::span<const PredictedGraph> predicted, std::span<const Region> reference,
                             const Lexicon& lex, CorpusMode mode, bool clamp_pred = false);

}  // namespace sgforge
