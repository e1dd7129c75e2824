#pragma once

// Region datasets: JSON-lines ingestion, image-keyed splitting and a seeded
// grammar-based synthetic corpus.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sgforge/error.hpp"
#include "sgforge/graph.hpp"

namespace sgforge {

struct Region {
  std::int64_t image_id = 0;
  std::int64_t region_id = 0;
  std::string description;  // canonicalized
  SceneGraph graph;

  friend bool operator==(const Region&, const Region&) = default;
};

/// {"image_id","region_id","phrase","objects","attributes","relationships"}
nlohmann::ordered_json region_to_json(const Region& r);
std::string region_to_line(const Region& r);  // compact, no trailing newline

/// Throws Error(EmptyDescription / ParseError / DanglingReference / ...).
Region region_from_json(const nlohmann::ordered_json& j);

struct RejectedRecord {
  std::size_t line;
  std::optional<std::int64_t> region_id;
  ErrorKind kind;
  std::string message;
};

struct IngestResult {
  std::vector<Region> regions;
  std::vector<RejectedRecord> rejected;
  std::size_t lines_read = 0;
};

/// Reads one region per non-blank line. Bad records are collected in
/// `rejected`, never thrown; duplicate region ids keep the first record.
IngestResult ingest(std::istream& in);
IngestResult ingest_file(const std::string& path);

void write_regions(std::ostream& out, const std::vector<Region>& regions);

struct SplitSpec {
  std::set<std::int64_t> train_image_ids;
  std::set<std::int64_t> eval_image_ids;

  nlohmann::json to_json() const;
  static SplitSpec from_json(const nlohmann::json& j);
  static SplitSpec load(const std::string& path);
};

struct SplitResult {
  std::vector<Region> train;
  std::vector<Region> eval;
  std::size_t dropped = 0;
};

/// Partitions by image id; regions of unlisted images are dropped.
/// Throws Error(InvalidConfig) if the spec's sets overlap.
SplitResult split(const std::vector<Region>& dataset, const SplitSpec& spec);

/// Deterministic image-level split holding out `eval_fraction` of images.
SplitSpec make_split(const std::vector<Region>& dataset, double eval_fraction, std::uint64_t seed);

struct SyntheticGrammar {
  std::vector<std::string> objects;
  std::vector<std::string> attributes;
  std::vector<std::string> relations;  // may be multi-word, e.g. "in front of"
  // Relative weights of the four patterns listed at generate_synthetic().
  std::vector<double> pattern_weights{1.0, 1.0, 1.0, 1.0};
  std::uint64_t seed = 17;
  std::size_t regions_per_image = 5;

  static SyntheticGrammar default_grammar();

  /// Throws Error(InvalidConfig): empty vocabularies, stopwords, or words
  /// shared between the object/attribute/relation vocabularies.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys fall back to default_grammar().
  static SyntheticGrammar from_json(const nlohmann::json& j);
};

/// Patterns (by index):
///   0  "<attr> <obj>"
///   1  "<attr> and <attr> <obj>"
///   2  "<obj> <rel> <obj>"
///   3  "<attr> <obj> <rel> the <obj>"
/// Region ids run 1..n; every `regions_per_image` consecutive regions share an image.
std::vector<Region> generate_synthetic(const SyntheticGrammar& grammar, std::size_t n);

}  // namespace sgforge
