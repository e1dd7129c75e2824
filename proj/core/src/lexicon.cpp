#include "sgforge/lexicon.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "sgforge/error.hpp"
#include "sgforge/graph.hpp"

namespace sgforge {

void Lexicon::add(std::string_view a, std::string_view b) {
  std::string ca = Label(a).text();
  std::string cb = Label(b).text();
  table_[ca].insert(cb);
  table_[cb].insert(ca);
}

bool Lexicon::synonymous(std::string_view a, std::string_view b) const {
  if (a == b) return true;
  auto it = table_.find(a);
  return it != table_.end() && it->second.count(std::string(b)) > 0;
}

std::set<std::string> Lexicon::synonyms(std::string_view label) const {
  std::set<std::string> out{std::string(label)};
  if (auto it = table_.find(label); it != table_.end()) out.insert(it->second.begin(), it->second.end());
  return out;
}

Lexicon Lexicon::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "lexicon must be a JSON object of label -> [synonyms]");
  Lexicon lex;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_array()) throw Error(ErrorKind::ParseError, "lexicon entry '" + key + "' must be an array");
    for (const auto& syn : value) {
      if (!syn.is_string()) throw Error(ErrorKind::ParseError, "lexicon synonyms must be strings");
      lex.add(key, syn.get<std::string>());
    }
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open lexicon " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace sgforge
