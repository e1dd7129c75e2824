#include "sgforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "sgforge/aligner.hpp"

namespace sgforge {

using ojson = nlohmann::ordered_json;

ojson region_to_json(const Region& r) {
  ojson g = graph_to_json(r.graph);
  ojson j;
  j["image_id"] = r.image_id;
  j["region_id"] = r.region_id;
  j["phrase"] = r.description;
  j["objects"] = std::move(g["objects"]);
  j["attributes"] = std::move(g["attributes"]);
  j["relationships"] = std::move(g["relations"]);
  return j;
}

std::string region_to_line(const Region& r) { return region_to_json(r).dump(); }

Region region_from_json(const ojson& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "region record must be a JSON object");
  for (const char* key : {"image_id", "region_id"})
    if (!j.contains(key) || !j[key].is_number_integer())
      throw Error(ErrorKind::ParseError, std::string("missing integer field \"") + key + "\"");
  if (!j.contains("phrase") || !j["phrase"].is_string())
    throw Error(ErrorKind::ParseError, "missing string field \"phrase\"");
  Region r;
  r.image_id = j["image_id"].get<std::int64_t>();
  r.region_id = j["region_id"].get<std::int64_t>();
  r.description = canonicalize_text(j["phrase"].get<std::string>());
  if (r.description.empty()) throw Error(ErrorKind::EmptyDescription, "region phrase is empty");
  r.graph = graph_from_json(j, "relationships");
  return r;
}

IngestResult ingest(std::istream& in) {
  IngestResult result;
  std::unordered_set<std::int64_t> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++result.lines_read;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::optional<std::int64_t> id;
    try {
      ojson j = ojson::parse(line);
      if (j.is_object() && j.contains("region_id") && j["region_id"].is_number_integer())
        id = j["region_id"].get<std::int64_t>();
      Region r = region_from_json(j);
      if (!seen.insert(r.region_id).second)
        throw Error(ErrorKind::IdMismatch, "duplicate region_id " + std::to_string(r.region_id));
      result.regions.push_back(std::move(r));
    } catch (const Error& e) {
      result.rejected.push_back({result.lines_read, id, e.kind(), e.what()});
    } catch (const nlohmann::json::exception& e) {
      result.rejected.push_back({result.lines_read, id, ErrorKind::ParseError, e.what()});
    }
  }
  return result;
}

IngestResult ingest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open regions file " + path);
  return ingest(in);
}

void write_regions(std::ostream& out, const std::vector<Region>& regions) {
  for (const auto& r : regions) out << region_to_line(r) << '\n';
}

// ---------------------------------------------------------------------------

nlohmann::json SplitSpec::to_json() const {
  return {{"train_image_ids", train_image_ids}, {"eval_image_ids", eval_image_ids}};
}

SplitSpec SplitSpec::from_json(const nlohmann::json& j) {
  SplitSpec s;
  try {
    s.train_image_ids = j.at("train_image_ids").get<std::set<std::int64_t>>();
    s.eval_image_ids = j.at("eval_image_ids").get<std::set<std::int64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("split spec: ") + e.what());
  }
  return s;
}

SplitSpec SplitSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open split spec " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

SplitResult split(const std::vector<Region>& dataset, const SplitSpec& spec) {
  for (auto id : spec.train_image_ids)
    if (spec.eval_image_ids.count(id))
      throw Error(ErrorKind::InvalidConfig, "image " + std::to_string(id) + " is in both train and eval");
  SplitResult out;
  for (const auto& r : dataset) {
    if (spec.train_image_ids.count(r.image_id)) out.train.push_back(r);
    else if (spec.eval_image_ids.count(r.image_id)) out.eval.push_back(r);
    else ++out.dropped;
  }
  return out;
}

SplitSpec make_split(const std::vector<Region>& dataset, double eval_fraction, std::uint64_t seed) {
  std::vector<std::int64_t> images;
  for (const auto& r : dataset) images.push_back(r.image_id);
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end()), images.end());
  std::mt19937_64 rng(seed);
  std::shuffle(images.begin(), images.end(), rng);
  const auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(images.size())));
  SplitSpec spec;
  for (std::size_t i = 0; i < images.size(); ++i)
    (i < n_eval ? spec.eval_image_ids : spec.train_image_ids).insert(images[i]);
  return spec;
}

// ---------------------------------------------------------------------------

SyntheticGrammar SyntheticGrammar::default_grammar() {
  SyntheticGrammar g;
  g.objects = {"man",  "woman", "dog",   "cat",   "bus",    "car",    "tree",   "table", "chair",    "horse",
               "boy",  "girl",  "bike",  "truck", "bench",  "plate",  "shirt",  "window", "building", "sign"};
  g.attributes = {"red",  "blue",  "green", "white", "black",  "yellow", "small",   "large",
                  "wooden", "old", "young", "tall",  "brown",  "open",   "striped", "metal"};
  g.relations = {"near",   "behind", "under",  "holding", "wearing",     "riding",
                 "beside", "above",  "on",     "in front of", "next to", "sitting on"};
  return g;
}

void SyntheticGrammar::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, "grammar: " + what); };
  if (objects.empty() || attributes.size() < 2 || relations.empty())
    fail("needs objects, at least two attributes, and relations");
  if (pattern_weights.size() != 4) fail("pattern_weights needs 4 entries");
  double total = 0;
  for (double w : pattern_weights) {
    if (!(w >= 0)) fail("pattern weights must be non-negative");
    total += w;
  }
  if (total <= 0) fail("pattern weights sum to zero");
  if (regions_per_image == 0) fail("regions_per_image must be positive");

  // word -> vocabulary it belongs to; relations may share words among themselves.
  std::map<std::string, int> owner;
  auto claim = [&](const std::vector<std::string>& vocab, int which) {
    std::set<std::string> labels;
    for (const auto& entry : vocab) {
      const std::string label = canonicalize_text(entry);
      if (label.empty()) fail("empty vocabulary entry");
      if (!labels.insert(label).second) fail("duplicate entry '" + label + "'");
      if (which != 2 && label.find(' ') != std::string::npos) fail("objects and attributes are single words");
      for (const auto& w : split_words(label)) {
        if (is_stopword(w)) fail("'" + label + "' contains a stopword");
        auto [it, inserted] = owner.emplace(w, which);
        if (!inserted && it->second != which) fail("word '" + w + "' appears in two vocabularies");
      }
    }
  };
  claim(objects, 0);
  claim(attributes, 1);
  claim(relations, 2);
}

nlohmann::json SyntheticGrammar::to_json() const {
  return {{"objects", objects},         {"attributes", attributes}, {"relations", relations},
          {"pattern_weights", pattern_weights}, {"seed", seed}, {"regions_per_image", regions_per_image}};
}

SyntheticGrammar SyntheticGrammar::from_json(const nlohmann::json& j) {
  SyntheticGrammar g = default_grammar();
  try {
    g.objects = j.value("objects", g.objects);
    g.attributes = j.value("attributes", g.attributes);
    g.relations = j.value("relations", g.relations);
    g.pattern_weights = j.value("pattern_weights", g.pattern_weights);
    g.seed = j.value("seed", g.seed);
    g.regions_per_image = j.value("regions_per_image", g.regions_per_image);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("grammar: ") + e.what());
  }
  return g;
}

std::vector<Region> generate_synthetic(const SyntheticGrammar& grammar, std::size_t n) {
  grammar.validate();
  std::mt19937_64 rng(grammar.seed);
  std::discrete_distribution<int> pattern(grammar.pattern_weights.begin(), grammar.pattern_weights.end());
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };

  std::vector<Region> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ObjectInstance> objects;
    std::vector<Attribute> attributes;
    std::vector<Relation> relations;
    std::string text;
    switch (pattern(rng)) {
      case 0: {
        const auto& attr = pick(grammar.attributes);
        const auto& obj = pick(grammar.objects);
        text = attr + " " + obj;
        objects.push_back({0, Label(obj)});
        attributes.push_back({0, Label(attr)});
        break;
      }
      case 1: {
        const auto& a1 = pick(grammar.attributes);
        std::string a2 = pick(grammar.attributes);
        while (a2 == a1) a2 = pick(grammar.attributes);
        const auto& obj = pick(grammar.objects);
        text = a1 + " and " + a2 + " " + obj;
        objects.push_back({0, Label(obj)});
        attributes.push_back({0, Label(a1)});
        attributes.push_back({0, Label(a2)});
        break;
      }
      case 2: {
        const auto& subj = pick(grammar.objects);
        const auto& rel = pick(grammar.relations);
        const auto& obj = pick(grammar.objects);
        text = subj + " " + rel + " " + obj;
        objects.push_back({0, Label(subj)});
        objects.push_back({1, Label(obj)});
        relations.push_back({0, Label(rel), 1});
        break;
      }
      default: {
        const auto& attr = pick(grammar.attributes);
        const auto& subj = pick(grammar.objects);
        const auto& rel = pick(grammar.relations);
        const auto& obj = pick(grammar.objects);
        text = attr + " " + subj + " " + rel + " the " + obj;
        objects.push_back({0, Label(subj)});
        objects.push_back({1, Label(obj)});
        attributes.push_back({0, Label(attr)});
        relations.push_back({0, Label(rel), 1});
        break;
      }
    }
    Region r;
    r.region_id = static_cast<std::int64_t>(i) + 1;
    r.image_id = static_cast<std::int64_t>(i / grammar.regions_per_image) + 1;
    r.description = canonicalize_text(text);
    r.graph = build_graph(std::move(objects), std::move(attributes), std::move(relations));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sgforge
