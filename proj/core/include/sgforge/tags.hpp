#pragma once

// Six-label token tagging scheme, arc legality, CONLL I/O and the
// deterministic tag-to-graph decoder.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgforge/graph.hpp"

namespace sgforge {

/// Order matters: it is the classifier's output order and the argmax tie-break order.
enum class NodeType : int { Subj = 0, Pred = 1, Objt = 2, Attr = 3, Same = 4, None = 5 };

inline constexpr std::size_t kNumNodeTypes = 6;
inline constexpr std::array<NodeType, kNumNodeTypes> kAllNodeTypes = {
    NodeType::Subj, NodeType::Pred, NodeType::Objt, NodeType::Attr, NodeType::Same, NodeType::None};

std::string_view to_string(NodeType t) noexcept;
std::optional<NodeType> parse_node_type(std::string_view s) noexcept;

/// Parent position of a token; 0 is the virtual ROOT.
using Position = std::size_t;
inline constexpr Position kRoot = 0;

struct TaggedToken {
  Position index = 0;  // 1-based
  std::string form;
  NodeType node_type = NodeType::None;
  Position parent = kRoot;

  friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

struct TaggedSentence {
  std::vector<TaggedToken> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const TaggedToken& at(Position index) const { return tokens.at(index - 1); }

  /// Builds a sentence with indices 1..T from (form, type, parent) triples.
  static TaggedSentence from(std::vector<std::tuple<std::string, NodeType, Position>> rows);

  friend bool operator==(const TaggedSentence&, const TaggedSentence&) = default;
};

/// Parent kind for arc_legal: ROOT or a node type.
struct ParentKind {
  bool root = false;
  NodeType type = NodeType::None;

  static constexpr ParentKind Root() { return {true, NodeType::None}; }
  static constexpr ParentKind Of(NodeType t) { return {false, t}; }
};

/// SUBJ->ROOT; PRED->SUBJ; OBJT->PRED; ATTR->{SUBJ,OBJT}; SAME->any non-NONE type.
bool arc_legal(NodeType child, ParentKind parent) noexcept;

enum class DropReason {
  SelfReference,
  ParentOutOfRange,
  IllegalArc,
  SubjectNotRoot,
  SameCycle,
  SameReachesNone,
  SameReachesRoot,
  ParentDropped,
};

std::string_view to_string(DropReason r) noexcept;

struct DroppedArc {
  Position child;
  DropReason reason;

  friend bool operator==(const DroppedArc&, const DroppedArc&) = default;
};

struct MergedPhrase {
  Position head;
  std::vector<Position> pieces;  // SAME tokens merged into head, ascending

  friend bool operator==(const MergedPhrase&, const MergedPhrase&) = default;
};

struct DecodeReport {
  SceneGraph graph;
  std::vector<DroppedArc> dropped_arcs;
  std::vector<MergedPhrase> merged_phrases;

  friend bool operator==(const DecodeReport&, const DecodeReport&) = default;
};

/// Total decode: every failure is recorded in dropped_arcs, never thrown.
/// Object ids in the resulting graph are the token indices of SUBJ/OBJT heads.
DecodeReport decode_tags_to_graph(const TaggedSentence& sentence);

/// Reads 5-column CONLL (INDEX, FORM, HEAD, ARC_LABEL, NODE_TYPE).
/// Throws ParseError with the 1-based line number.
std::vector<TaggedSentence> read_conll(std::string_view text);

/// Canonical CONLL: LF endings, each sentence followed by one blank line.
/// NONE rows are written as `_ _ _`; empty sentences are skipped.
std::string write_conll(const std::vector<TaggedSentence>& sentences);

}  // namespace sgforge
