#include "sgforge/aligner.hpp"

#include <algorithm>
#include <optional>

namespace sgforge {

std::string_view to_string(UnalignedNode::Kind k) noexcept {
  switch (k) {
    case UnalignedNode::Kind::Object: return "object";
    case UnalignedNode::Kind::Attribute: return "attribute";
    case UnalignedNode::Kind::Relation: return "relation";
  }
  return "object";
}

bool is_stopword(std::string_view word) noexcept {
  return std::find(std::begin(kStopwords), std::end(kStopwords), word) != std::end(kStopwords);
}

std::size_t useful_word_count(std::string_view description) {
  auto words = split_words(canonicalize_text(description));
  return static_cast<std::size_t>(
      std::count_if(words.begin(), words.end(), [](const std::string& w) { return !is_stopword(w); }));
}

namespace {

struct Span {
  std::size_t begin;  // 0-based word offsets, [begin, end)
  std::size_t end;
  std::size_t head() const { return end; }  // 1-based position of the last word
};

struct Node {
  UnalignedNode::Kind kind;
  std::size_t index;
  const Label* label;
};

class SpanMatcher {
 public:
  SpanMatcher(std::vector<std::string> words, const Lexicon& lex)
      : words_(std::move(words)), consumed_(words_.size(), false), lex_(lex) {}

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  std::optional<Span> claim(const Label& label) {
    // Candidate surface forms: the label itself first, then synonyms in order.
    std::vector<std::vector<std::string>> candidates{split_words(label.text())};
    for (const auto& syn : lex_.synonyms(label.text()))
      if (syn != label.text()) candidates.push_back(split_words(syn));

    for (std::size_t start = 0; start < words_.size(); ++start) {
      for (const auto& cand : candidates) {
        if (fits(start, cand)) {
          Span span{start, start + cand.size()};
          std::fill(consumed_.begin() + span.begin, consumed_.begin() + span.end, true);
          return span;
        }
      }
    }
    return std::nullopt;
  }

 private:
  bool fits(std::size_t start, const std::vector<std::string>& cand) const {
    if (cand.empty() || start + cand.size() > words_.size()) return false;
    for (std::size_t k = 0; k < cand.size(); ++k)
      if (consumed_[start + k] || words_[start + k] != cand[k]) return false;
    return true;
  }

  std::vector<std::string> words_;
  std::vector<bool> consumed_;
  const Lexicon& lex_;
};

}  // namespace

AlignmentResult align(std::string_view description, const SceneGraph& g, const Lexicon& lex) {
  SpanMatcher matcher(split_words(canonicalize_text(description)), lex);

  const auto& objects = g.objects();
  const auto& attributes = g.attributes();
  const auto& relations = g.relations();

  std::vector<Node> nodes;
  for (std::size_t i = 0; i < objects.size(); ++i) nodes.push_back({UnalignedNode::Kind::Object, i, &objects[i].label});
  for (std::size_t i = 0; i < attributes.size(); ++i)
    nodes.push_back({UnalignedNode::Kind::Attribute, i, &attributes[i].attribute});
  for (std::size_t i = 0; i < relations.size(); ++i)
    nodes.push_back({UnalignedNode::Kind::Relation, i, &relations[i].predicate});
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) {
    return a.label->word_count() > b.label->word_count();
  });

  std::vector<std::optional<Span>> object_span(objects.size());
  std::vector<std::optional<Span>> attribute_span(attributes.size());
  std::vector<std::optional<Span>> relation_span(relations.size());
  for (const Node& node : nodes) {
    auto span = matcher.claim(*node.label);
    switch (node.kind) {
      case UnalignedNode::Kind::Object: object_span[node.index] = span; break;
      case UnalignedNode::Kind::Attribute: attribute_span[node.index] = span; break;
      case UnalignedNode::Kind::Relation: relation_span[node.index] = span; break;
    }
  }

  auto object_pos = [&](ObjectId id) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < objects.size(); ++i)
      if (objects[i].id == id) return i;
    return std::nullopt;
  };

  AlignmentResult result;
  auto unaligned = [&](UnalignedNode::Kind kind, std::size_t index, const Label& label, std::string reason) {
    result.unaligned_nodes.push_back({kind, index, label.text(), std::move(reason)});
  };

  // Relations with all three parts aligned are candidates; they decide the
  // object roles. A node that is ever a subject stays SUBJ.
  std::vector<bool> candidate(relations.size(), false);
  std::vector<bool> is_subject(objects.size(), false);
  std::vector<bool> is_object(objects.size(), false);
  for (std::size_t r = 0; r < relations.size(); ++r) {
    const std::size_t s = *object_pos(relations[r].subject);
    const std::size_t o = *object_pos(relations[r].object);
    if (relation_span[r] && object_span[s] && object_span[o] && s != o) {
      candidate[r] = true;
      is_subject[s] = true;
      is_object[o] = true;
    }
  }

  const std::size_t n = matcher.size();
  std::vector<NodeType> type(n + 1, NodeType::None);
  std::vector<Position> parent(n + 1, kRoot);
  auto tag_span = [&](const Span& span, NodeType t, Position p) {
    for (std::size_t w = span.begin; w + 1 < span.end; ++w) {
      type[w + 1] = NodeType::Same;
      parent[w + 1] = span.head();
    }
    type[span.head()] = t;
    parent[span.head()] = p;
  };

  std::size_t aligned = 0;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (!object_span[i]) {
      unaligned(UnalignedNode::Kind::Object, i, objects[i].label, "no matching span");
      continue;
    }
    ++aligned;
    const bool objt = is_object[i] && !is_subject[i];
    tag_span(*object_span[i], objt ? NodeType::Objt : NodeType::Subj, kRoot);
  }

  std::vector<bool> objt_claimed(objects.size(), false);
  for (std::size_t r = 0; r < relations.size(); ++r) {
    const auto& span = relation_span[r];
    if (!candidate[r]) {
      unaligned(UnalignedNode::Kind::Relation, r, relations[r].predicate,
                span ? "endpoint not aligned" : "no matching span");
      continue;
    }
    const std::size_t s = *object_pos(relations[r].subject);
    const std::size_t o = *object_pos(relations[r].object);
    if (is_subject[o] || objt_claimed[o]) {
      unaligned(UnalignedNode::Kind::Relation, r, relations[r].predicate,
                is_subject[o] ? "object is also a subject" : "object already attached to another relation");
      continue;
    }
    objt_claimed[o] = true;
    tag_span(*span, NodeType::Pred, object_span[s]->head());
    parent[object_span[o]->head()] = span->head();
    ++aligned;
  }

  for (std::size_t a = 0; a < attributes.size(); ++a) {
    const auto& span = attribute_span[a];
    const std::size_t o = *object_pos(attributes[a].object);
    if (!span || !object_span[o]) {
      unaligned(UnalignedNode::Kind::Attribute, a, attributes[a].attribute,
                span ? "object not aligned" : "no matching span");
      continue;
    }
    tag_span(*span, NodeType::Attr, object_span[o]->head());
    ++aligned;
  }

  for (std::size_t w = 0; w < n; ++w) {
    const Position pos = w + 1;
    const bool none = type[pos] == NodeType::None;
    result.tagged.tokens.push_back({pos, matcher.words()[w], type[pos], none ? kRoot : parent[pos]});
  }
  const std::size_t total = objects.size() + attributes.size() + relations.size();
  result.coverage = total == 0 ? 1.0 : static_cast<double>(aligned) / static_cast<double>(total);
  return result;
}

}  // namespace sgforge
