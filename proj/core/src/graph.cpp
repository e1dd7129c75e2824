#include "sgforge/graph.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "sgforge/error.hpp"

namespace sgforge {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyLabel: return "EmptyLabel";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::DuplicateObjectId: return "DuplicateObjectId";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SequenceTooLong: return "SequenceTooLong";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::IdMismatch: return "IdMismatch";
    case ErrorKind::EmptyDescription: return "EmptyDescription";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::string canonicalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (const auto& word : split_words(raw)) {
    if (!out.empty()) out.push_back(' ');
    for (char c : word) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Label::Label(std::string_view raw) : text_(canonicalize_text(raw)) {
  if (text_.empty()) throw Error(ErrorKind::EmptyLabel, "label is empty after canonicalization");
}

std::size_t Label::word_count() const noexcept {
  return static_cast<std::size_t>(std::count(text_.begin(), text_.end(), ' ')) + 1;
}

Label canonicalize_label(std::string_view raw) { return Label(raw); }

const ObjectInstance* SceneGraph::find(ObjectId id) const noexcept {
  auto it = std::find_if(objects_.begin(), objects_.end(),
                         [id](const ObjectInstance& o) { return o.id == id; });
  return it == objects_.end() ? nullptr : &*it;
}

SceneGraph build_graph(std::vector<ObjectInstance> objects, std::vector<Attribute> attributes,
                       std::vector<Relation> relations) {
  std::unordered_set<ObjectId> ids;
  for (const auto& o : objects) {
    if (o.id < 0) throw Error(ErrorKind::DanglingReference, "negative object id " + std::to_string(o.id));
    if (!ids.insert(o.id).second)
      throw Error(ErrorKind::DuplicateObjectId, "object id " + std::to_string(o.id) + " repeated");
  }
  auto require = [&](ObjectId id) {
    if (!ids.count(id))
      throw Error(ErrorKind::DanglingReference, "unknown object id " + std::to_string(id));
  };

  SceneGraph g;
  g.objects_ = std::move(objects);

  std::set<std::pair<ObjectId, std::string>> seen_attrs;
  for (auto& a : attributes) {
    require(a.object);
    if (seen_attrs.emplace(a.object, a.attribute.text()).second) g.attributes_.push_back(std::move(a));
  }

  std::set<std::tuple<ObjectId, std::string, ObjectId>> seen_rels;
  for (auto& r : relations) {
    require(r.subject);
    require(r.object);
    if (!seen_rels.emplace(r.subject, r.predicate.text(), r.object).second) continue;
    if (r.subject == r.object) g.self_relations_.push_back(g.relations_.size());
    g.relations_.push_back(std::move(r));
  }
  return g;
}

bool TupleSet::subset_of(const TupleSet& other) const {
  return std::includes(other.unary.begin(), other.unary.end(), unary.begin(), unary.end()) &&
         std::includes(other.binary.begin(), other.binary.end(), binary.begin(), binary.end()) &&
         std::includes(other.ternary.begin(), other.ternary.end(), ternary.begin(), ternary.end());
}

TupleSet extract_tuples(const SceneGraph& g) {
  TupleSet t;
  for (const auto& o : g.objects()) t.unary.insert(o.label.text());
  for (const auto& a : g.attributes())
    t.binary.emplace(g.find(a.object)->label.text(), a.attribute.text());
  for (const auto& r : g.relations())
    t.ternary.emplace(g.find(r.subject)->label.text(), r.predicate.text(),
                      g.find(r.object)->label.text());
  return t;
}

nlohmann::ordered_json graph_to_json(const SceneGraph& g) {
  nlohmann::ordered_json j;
  j["objects"] = nlohmann::ordered_json::array();
  for (const auto& o : g.objects()) j["objects"].push_back({{"id", o.id}, {"label", o.label.text()}});
  j["attributes"] = nlohmann::ordered_json::array();
  for (const auto& a : g.attributes())
    j["attributes"].push_back(nlohmann::ordered_json::array({a.object, a.attribute.text()}));
  j["relations"] = nlohmann::ordered_json::array();
  for (const auto& r : g.relations())
    j["relations"].push_back(nlohmann::ordered_json::array({r.subject, r.predicate.text(), r.object}));
  return j;
}

namespace {

ObjectId read_id(const nlohmann::ordered_json& v) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw Error(ErrorKind::ParseError, "object ids must be non-negative integers, got " + v.dump());
  return v.get<ObjectId>();
}

std::string read_str(const nlohmann::ordered_json& v) {
  if (!v.is_string()) throw Error(ErrorKind::ParseError, "expected a string label, got " + v.dump());
  return v.get<std::string>();
}

const nlohmann::ordered_json& array_field(const nlohmann::ordered_json& j, std::string_view key) {
  static const nlohmann::ordered_json empty = nlohmann::ordered_json::array();
  auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) return empty;
  if (!it->is_array()) throw Error(ErrorKind::ParseError, "\"" + std::string(key) + "\" must be an array");
  return *it;
}

}  // namespace

SceneGraph graph_from_json(const nlohmann::ordered_json& j, std::string_view relations_key) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "graph must be a JSON object");
  std::vector<ObjectInstance> objects;
  for (const auto& o : array_field(j, "objects")) {
    if (!o.is_object() || !o.contains("id") || !o.contains("label"))
      throw Error(ErrorKind::ParseError, "object entries need \"id\" and \"label\"");
    objects.push_back({read_id(o["id"]), Label(read_str(o["label"]))});
  }
  std::vector<Attribute> attributes;
  for (const auto& a : array_field(j, "attributes")) {
    if (!a.is_array() || a.size() != 2) throw Error(ErrorKind::ParseError, "attribute entries are [id, label]");
    attributes.push_back({read_id(a[0]), Label(read_str(a[1]))});
  }
  std::vector<Relation> relations;
  for (const auto& r : array_field(j, relations_key)) {
    if (!r.is_array() || r.size() != 3)
      throw Error(ErrorKind::ParseError, "relation entries are [subject_id, label, object_id]");
    relations.push_back({read_id(r[0]), Label(read_str(r[1])), read_id(r[2])});
  }
  return build_graph(std::move(objects), std::move(attributes), std::move(relations));
}

}  // namespace sgforge
