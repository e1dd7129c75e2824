#include "sgforge/evaluator.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "sgforge/aligner.hpp"
#include "sgforge/error.hpp"

namespace sgforge {

Scores Scores::from_counts(std::size_t matches, std::size_t num_pred, std::size_t num_ref) {
  Scores s;
  s.matches = matches;
  s.num_pred = num_pred;
  s.num_ref = num_ref;
  s.precision = num_pred == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(num_pred);
  s.recall = num_ref == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(num_ref);
  const double sum = s.precision + s.recall;
  s.f1 = sum == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / sum;
  return s;
}

std::vector<Tuple> flatten(const TupleSet& t) {
  std::vector<Tuple> out;
  out.reserve(t.size());
  for (const auto& u : t.unary) out.push_back({u});
  for (const auto& [o, a] : t.binary) out.push_back({o, a});
  for (const auto& [s, p, o] : t.ternary) out.push_back({s, p, o});
  return out;
}

bool tuple_match(const Tuple& a, const Tuple& b, const Lexicon& lex) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!lex.synonymous(a[i], b[i])) return false;
  return true;
}

std::size_t greedy_match_count(const TupleSet& pred, const TupleSet& ref, const Lexicon& lex) {
  const auto p = flatten(pred);
  const auto r = flatten(ref);
  std::vector<bool> p_used(p.size(), false);
  std::vector<bool> r_used(r.size(), false);
  std::size_t matches = 0;

  // Both sides are sets, so exact pairs are unique.
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto it = std::lower_bound(r.begin(), r.end(), p[i], [](const Tuple& a, const Tuple& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    if (it != r.end() && *it == p[i]) {
      p_used[i] = true;
      r_used[static_cast<std::size_t>(it - r.begin())] = true;
      ++matches;
    }
  }
  if (lex.empty()) return matches;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p_used[i]) continue;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!r_used[j] && tuple_match(p[i], r[j], lex)) {
        p_used[i] = r_used[j] = true;
        ++matches;
        break;
      }
    }
  }
  return matches;
}

Scores spice_f1(const TupleSet& pred, const TupleSet& ref, const Lexicon& lex, ScoringMode mode) {
  const std::size_t matches = greedy_match_count(pred, ref, lex);
  if (mode.kind == ScoringMode::Kind::Base) return Scores::from_counts(matches, pred.size(), ref.size());

  // Clamped sides cap the match count seen by their own ratio only, so
  // precision is unchanged unless the prediction side is clamped too.
  // A cap of 0 (no useful words) still leaves one tuple to find.
  const std::size_t cap = std::max<std::size_t>(mode.cap, 1);
  const std::size_t num_ref = std::min(ref.size(), cap);
  const std::size_t num_pred = mode.clamp_pred ? std::min(pred.size(), cap) : pred.size();
  Scores s;
  s.matches = std::min({matches, num_ref, num_pred});
  s.num_pred = num_pred;
  s.num_ref = num_ref;
  s.precision = num_pred == 0 ? 0.0 : static_cast<double>(std::min(matches, num_pred)) / static_cast<double>(num_pred);
  s.recall = num_ref == 0 ? 0.0 : static_cast<double>(std::min(matches, num_ref)) / static_cast<double>(num_ref);
  const double sum = s.precision + s.recall;
  s.f1 = sum == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / sum;
  return s;
}

nlohmann::ordered_json to_json(const RegionScore& r) {
  return {{"region_id", r.region_id}, {"matches", r.scores.matches}, {"num_pred", r.scores.num_pred},
          {"num_ref", r.scores.num_ref}, {"p", r.scores.precision},   {"r", r.scores.recall},
          {"f", r.scores.f1}};
}

nlohmann::ordered_json CorpusReport::aggregate_json() const {
  return {{"aggregate", true},
          {"regions", regions.size()},
          {"skipped_empty_reference", skipped_empty_reference},
          {"matches", aggregate.matches},
          {"num_pred", aggregate.num_pred},
          {"num_ref", aggregate.num_ref},
          {"p", aggregate.precision},
          {"r", aggregate.recall},
          {"f", aggregate.f1}};
}

CorpusReport evaluate_corpus(std::span<const PredictedGraph> predicted, std::span<const Region> reference,
                             const Lexicon& lex, CorpusMode mode, bool clamp_pred) {
  std::map<std::int64_t, const SceneGraph*> by_id;
  for (const auto& p : predicted)
    if (!by_id.emplace(p.region_id, &p.graph).second)
      throw Error(ErrorKind::IdMismatch, "duplicate predicted region " + std::to_string(p.region_id));
  if (by_id.size() != reference.size())
    throw Error(ErrorKind::IdMismatch, std::to_string(predicted.size()) + " predictions for " +
                                           std::to_string(reference.size()) + " reference regions");

  CorpusReport report;
  double sum_p = 0, sum_r = 0, sum_f = 0;
  for (const auto& ref : reference) {
    auto it = by_id.find(ref.region_id);
    if (it == by_id.end())
      throw Error(ErrorKind::IdMismatch, "no prediction for region " + std::to_string(ref.region_id));
    if (ref.graph.empty()) {
      ++report.skipped_empty_reference;
      continue;
    }
    ScoringMode m = mode == CorpusMode::Base ? ScoringMode::base()
                                             : ScoringMode::limited(useful_word_count(ref.description), clamp_pred);
    Scores s = spice_f1(extract_tuples(*it->second), extract_tuples(ref.graph), lex, m);
    report.aggregate.matches += s.matches;
    report.aggregate.num_pred += s.num_pred;
    report.aggregate.num_ref += s.num_ref;
    sum_p += s.precision;
    sum_r += s.recall;
    sum_f += s.f1;
    report.regions.push_back({ref.region_id, s});
  }
  if (!report.regions.empty()) {
    const auto n = static_cast<double>(report.regions.size());
    report.aggregate.precision = sum_p / n;
    report.aggregate.recall = sum_r / n;
    report.aggregate.f1 = sum_f / n;
  }
  return report;
}

}  // namespace sgforge
