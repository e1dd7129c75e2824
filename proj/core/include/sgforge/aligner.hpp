#pragma once

// Oracle alignment of a ground-truth scene graph onto its region description.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sgforge/graph.hpp"
#include "sgforge/lexicon.hpp"
#include "sgforge/tags.hpp"

namespace sgforge {

struct UnalignedNode {
  enum class Kind { Object, Attribute, Relation };
  Kind kind;
  std::size_t index;  // into the source graph's objects()/attributes()/relations()
  std::string label;
  std::string reason;

  friend bool operator==(const UnalignedNode&, const UnalignedNode&) = default;
};

std::string_view to_string(UnalignedNode::Kind k) noexcept;

struct AlignmentResult {
  TaggedSentence tagged;
  double coverage = 1.0;  // aligned nodes / graph nodes; 1.0 for empty graphs
  std::vector<UnalignedNode> unaligned_nodes;
};

/// Greedy longest-label-first alignment. Each graph node (object, attribute,
/// relation predicate) claims the earliest unconsumed token span equal to its
/// label or a lexicon synonym; the span's last token carries the node type and
/// the earlier tokens become SAME pieces pointing at it.
AlignmentResult align(std::string_view description, const SceneGraph& g, const Lexicon& lex = {});

inline constexpr std::string_view kStopwords[] = {"a", "an", "the", "and"};

bool is_stopword(std::string_view word) noexcept;

/// Non-stopword whitespace tokens after canonicalization; caps the reference
/// side in limited-tuples scoring.
std::size_t useful_word_count(std::string_view description);

}  // namespace sgforge
