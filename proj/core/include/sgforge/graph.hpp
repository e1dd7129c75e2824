#pragma once

// Scene graph data model: object instances, attribute pairs and relation
// triples, plus tuple extraction for SPICE-style scoring.

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sgforge {

/// Canonical node label: lowercase, trimmed, single-space separated, non-empty.
class Label {
 public:
  /// Canonicalizes `raw`; throws Error(EmptyLabel) if nothing remains.
  explicit Label(std::string_view raw);

  const std::string& text() const noexcept { return text_; }
  std::size_t word_count() const noexcept;

  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label&, const Label&) = default;

 private:
  std::string text_;
};

/// Lowercase + whitespace normalization. Throws Error(EmptyLabel) on blank input.
Label canonicalize_label(std::string_view raw);

/// Lowercase + whitespace normalization without the emptiness check.
std::string canonicalize_text(std::string_view raw);

/// Splits on ASCII whitespace.
std::vector<std::string> split_words(std::string_view text);

using ObjectId = std::int64_t;

struct ObjectInstance {
  ObjectId id;
  Label label;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct Attribute {
  ObjectId object;
  Label attribute;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Relation {
  ObjectId subject;
  Label predicate;
  ObjectId object;

  friend bool operator==(const Relation&, const Relation&) = default;
};

/// Immutable, validated scene graph. Construct through build_graph().
class SceneGraph {
 public:
  SceneGraph() = default;

  const std::vector<ObjectInstance>& objects() const noexcept { return objects_; }
  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
  const std::vector<Relation>& relations() const noexcept { return relations_; }

  /// Indices into relations() whose subject equals their object.
  const std::vector<std::size_t>& self_relations() const noexcept { return self_relations_; }

  bool empty() const noexcept {
    return objects_.empty() && attributes_.empty() && relations_.empty();
  }
  const ObjectInstance* find(ObjectId id) const noexcept;

  friend bool operator==(const SceneGraph& a, const SceneGraph& b) {
    return a.objects_ == b.objects_ && a.attributes_ == b.attributes_ &&
           a.relations_ == b.relations_;
  }

 private:
  friend SceneGraph build_graph(std::vector<ObjectInstance>, std::vector<Attribute>,
                                std::vector<Relation>);

  std::vector<ObjectInstance> objects_;
  std::vector<Attribute> attributes_;
  std::vector<Relation> relations_;
  std::vector<std::size_t> self_relations_;
};

/// Validates references and deduplicates attribute pairs / relation triples
/// (first occurrence wins, order otherwise preserved).
/// Throws Error(DuplicateObjectId) or Error(DanglingReference).
SceneGraph build_graph(std::vector<ObjectInstance> objects, std::vector<Attribute> attributes,
                       std::vector<Relation> relations);

struct TupleSet {
  std::set<std::string> unary;
  std::set<std::pair<std::string, std::string>> binary;
  std::set<std::tuple<std::string, std::string, std::string>> ternary;

  std::size_t size() const noexcept { return unary.size() + binary.size() + ternary.size(); }
  bool empty() const noexcept { return size() == 0; }

  /// true when every tuple of *this is also in `other`.
  bool subset_of(const TupleSet& other) const;

  friend bool operator==(const TupleSet&, const TupleSet&) = default;
};

TupleSet extract_tuples(const SceneGraph& g);

// Graph JSON: {"objects":[{"id":int,"label":str}],"attributes":[[id,label]],
//              "relations":[[subj_id,label,obj_id]]}
nlohmann::ordered_json graph_to_json(const SceneGraph& g);

/// Parses the graph arrays from `j`. `relations_key` lets region records use
/// "relationships". Throws Error(ParseError / DanglingReference / EmptyLabel ...).
SceneGraph graph_from_json(const nlohmann::ordered_json& j,
                           std::string_view relations_key = "relations");

}  // namespace sgforge
