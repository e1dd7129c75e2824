#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace sgforge {

/// Synonym table over canonical labels. Symmetric: adding a<->b makes each
/// a synonym of the other. Not transitive. Every label is its own synonym.
class Lexicon {
 public:
  Lexicon() = default;

  void add(std::string_view a, std::string_view b);

  bool synonymous(std::string_view a, std::string_view b) const;

  /// Known synonyms of `label`, always including `label` itself.
  std::set<std::string> synonyms(std::string_view label) const;

  bool empty() const noexcept { return table_.empty(); }

  /// JSON object: label -> list of synonym labels.
  static Lexicon from_json(const nlohmann::json& j);
  static Lexicon load(const std::string& path);

 private:
  std::map<std::string, std::set<std::string>, std::less<>> table_;
};

}  // namespace sgforge
