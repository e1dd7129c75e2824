#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sgforge/aligner.hpp"
#include "sgforge/checkpoint.hpp"
#include "sgforge/corpus.hpp"
#include "sgforge/error.hpp"
#include "sgforge/evaluator.hpp"
#include "sgforge/tags.hpp"
#include "sgforge/trainer.hpp"

namespace sgforge::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string version_string() { return std::string("sgforge ") + SGFORGE_VERSION; }

class Io {
 public:
  Io(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  std::istream& input(const std::string& path) {
    if (path == "-") return in_;
    auto f = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*f) throw Error(ErrorKind::Io, "cannot open " + path);
    inputs_.push_back(std::move(f));
    return *inputs_.back();
  }

  std::ostream& output(const std::string& path) {
    if (path == "-") return out_;
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*f) throw Error(ErrorKind::Io, "cannot write " + path);
    outputs_.push_back(std::move(f));
    return *outputs_.back();
  }

  std::string slurp(const std::string& path) {
    std::ostringstream ss;
    ss << input(path).rdbuf();
    return ss.str();
  }

 private:
  std::istream& in_;
  std::ostream& out_;
  std::vector<std::unique_ptr<std::ifstream>> inputs_;
  std::vector<std::unique_ptr<std::ofstream>> outputs_;
};

nlohmann::json read_json_file(Io& io, const std::string& path) {
  try {
    return nlohmann::json::parse(io.slurp(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

Lexicon load_lexicon(Io& io, const std::string& path) {
  return path.empty() ? Lexicon{} : Lexicon::from_json(read_json_file(io, path));
}

std::vector<Region> load_regions(Io& io, const std::string& path, std::ostream& err, bool strict) {
  IngestResult r = ingest(io.input(path));
  for (const auto& rej : r.rejected)
    err << path << ":" << rej.line << ": rejected: " << rej.message << "\n";
  if (strict && !r.rejected.empty())
    throw Error(ErrorKind::ParseError, path + ": " + std::to_string(r.rejected.size()) + " malformed records");
  return std::move(r.regions);
}

std::vector<Region> restrict_to_eval(const std::vector<Region>& regions, const std::string& split_path) {
  if (split_path.empty()) return regions;
  return split(regions, SplitSpec::load(split_path)).eval;
}

ojson graph_line(std::int64_t region_id, const std::string& phrase, const SceneGraph& g) {
  ojson j;
  j["region_id"] = region_id;
  j["phrase"] = phrase;
  ojson graph = graph_to_json(g);
  for (auto& [k, v] : graph.items()) j[k] = v;
  return j;
}

// --------------------------------------------------------------------------

struct GenOptions {
  std::string grammar, out, split_out;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  double dev_fraction = 0.1;
};

int cmd_gen(const GenOptions& o, Io& io, std::ostream& out) {
  SyntheticGrammar g = o.grammar.empty() ? SyntheticGrammar::default_grammar()
                                         : SyntheticGrammar::from_json(read_json_file(io, o.grammar));
  if (o.seed) g.seed = *o.seed;
  auto regions = generate_synthetic(g, o.n);
  write_regions(io.output(o.out), regions);
  ojson summary = {{"regions", regions.size()}, {"seed", g.seed}};
  if (!o.split_out.empty()) {
    SplitSpec spec = make_split(regions, o.dev_fraction, g.seed);
    io.output(o.split_out) << spec.to_json().dump() << "\n";
    summary["train_images"] = spec.train_image_ids.size();
    summary["eval_images"] = spec.eval_image_ids.size();
  }
  if (o.out != "-") out << summary.dump() << "\n";
  return kExitOk;
}

struct AlignOptions {
  std::string regions, lexicon, out, report;
};

int cmd_align(const AlignOptions& o, Io& io, std::ostream& out, std::ostream& err) {
  Lexicon lex = load_lexicon(io, o.lexicon);
  auto regions = load_regions(io, o.regions, err, false);
  std::vector<TaggedSentence> tagged;
  double coverage_sum = 0;
  std::size_t unaligned = 0;
  std::ostream* report = o.report.empty() ? nullptr : &io.output(o.report);
  for (const auto& r : regions) {
    AlignmentResult a = align(r.description, r.graph, lex);
    coverage_sum += a.coverage;
    unaligned += a.unaligned_nodes.size();
    if (report) {
      ojson line = {{"region_id", r.region_id}, {"coverage", a.coverage}};
      line["unaligned"] = ojson::array();
      for (const auto& u : a.unaligned_nodes)
        line["unaligned"].push_back({{"kind", std::string(to_string(u.kind))}, {"label", u.label}, {"reason", u.reason}});
      *report << line.dump() << "\n";
    }
    tagged.push_back(std::move(a.tagged));
  }
  io.output(o.out) << write_conll(tagged);
  if (o.out != "-") {
    ojson summary = {{"regions", regions.size()},
                     {"mean_coverage", regions.empty() ? 1.0 : coverage_sum / static_cast<double>(regions.size())},
                     {"unaligned_nodes", unaligned}};
    out << summary.dump() << "\n";
  }
  return kExitOk;
}

struct TrainOptions {
  std::string conll, regions, model_config, train_config, out, split;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainOptions& o, Io& io, std::ostream& out, std::ostream& err) {
  nlohmann::json mc_json = o.model_config.empty() ? nlohmann::json::object() : read_json_file(io, o.model_config);
  ModelConfig mc = ModelConfig::from_json(mc_json);
  TrainConfig tc = o.train_config.empty() ? TrainConfig{} : TrainConfig::from_json(read_json_file(io, o.train_config));
  if (o.seed) tc.seed = *o.seed;

  auto regions = load_regions(io, o.regions, err, false);
  auto targets = read_conll(io.slurp(o.conll));
  if (targets.size() != regions.size())
    throw Error(ErrorKind::IdMismatch, o.conll + " has " + std::to_string(targets.size()) + " sentences for " +
                                           std::to_string(regions.size()) + " regions");
  std::map<std::int64_t, Example> by_id;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto words = split_words(regions[i].description);
    bool same = words.size() == targets[i].size();
    for (std::size_t w = 0; same && w < words.size(); ++w) same = words[w] == targets[i].tokens[w].form;
    if (!same)
      throw Error(ErrorKind::IdMismatch, "CONLL sentence " + std::to_string(i + 1) + " does not match region " +
                                             std::to_string(regions[i].region_id));
    by_id[regions[i].region_id] = {regions[i].region_id, regions[i].description, targets[i], regions[i].graph};
  }

  std::vector<Example> train_set, dev_set;
  auto collect = [&](const std::vector<Region>& rs, std::vector<Example>& dst) {
    for (const auto& r : rs) dst.push_back(by_id.at(r.region_id));
  };
  if (o.split.empty()) {
    collect(regions, train_set);
  } else {
    auto parts = split(regions, SplitSpec::load(o.split));
    collect(parts.train, train_set);
    collect(parts.eval, dev_set);
  }

  std::vector<std::string> descriptions;
  for (const auto& ex : train_set) descriptions.push_back(ex.description);
  Tokenizer tok = Tokenizer::fit(descriptions, mc.tokenizer_mode, mc_json.value("min_count", std::size_t{1}),
                                 mc_json.value("num_merges", std::size_t{200}));

  TrainResult result = train(train_set, dev_set, mc, tc, tok, &out);
  save_checkpoint(result.final_checkpoint, o.out);
  save_checkpoint(result.best_checkpoint, o.out + "/best");
  if (result.skipped_too_long > 0)
    err << "skipped " << result.skipped_too_long << " examples longer than max_len\n";
  return kExitOk;
}

struct ParseOptions {
  std::string ckpt, input = "-", format = "graph-json", output = "-", split, input_format = "auto";
};

int cmd_parse(const ParseOptions& o, Io& io, std::ostream& err) {
  Checkpoint ckpt = load_checkpoint(o.ckpt);
  const std::string text = io.slurp(o.input);

  std::vector<std::pair<std::int64_t, std::string>> items;
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool regions_input =
      o.input_format == "regions" || (o.input_format == "auto" && first != std::string::npos && text[first] == '{');
  if (regions_input) {
    std::istringstream ss(text);
    IngestResult r = ingest(ss);
    for (const auto& rej : r.rejected) err << o.input << ":" << rej.line << ": rejected: " << rej.message << "\n";
    for (const auto& region : restrict_to_eval(r.regions, o.split)) items.emplace_back(region.region_id, region.description);
  } else {
    std::istringstream ss(text);
    std::string line;
    std::int64_t n = 0;
    while (std::getline(ss, line)) {
      ++n;
      if (!canonicalize_text(line).empty()) items.emplace_back(n, canonicalize_text(line));
    }
  }

  std::ostream& os = io.output(o.output);
  std::vector<TaggedSentence> sentences;
  for (const auto& [id, phrase] : items) {
    TaggedSentence tags = predict(ckpt.params, ckpt.model_config, ckpt.tokenizer, phrase);
    if (o.format == "conll") sentences.push_back(std::move(tags));
    else os << graph_line(id, phrase, decode_tags_to_graph(tags).graph).dump() << "\n";
  }
  if (o.format == "conll") os << write_conll(sentences);
  return kExitOk;
}

struct EvalOptions {
  std::string pred, ref, mode = "base", lexicon, out, split;
  bool clamp_pred = false;
};

std::vector<PredictedGraph> read_predictions(const std::string& text, const std::vector<Region>& reference) {
  std::vector<std::pair<std::optional<std::int64_t>, SceneGraph>> rows;
  std::istringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      ojson j = ojson::parse(line);
      std::optional<std::int64_t> id;
      if (j.contains("region_id")) id = j["region_id"].get<std::int64_t>();
      rows.emplace_back(id, graph_from_json(j, j.contains("relationships") ? "relationships" : "relations"));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  const bool all_ids = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.first.has_value(); });
  if (!all_ids && rows.size() != reference.size())
    throw Error(ErrorKind::IdMismatch, "predictions without region_id must line up with the reference file");
  std::vector<PredictedGraph> out;
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.push_back({all_ids ? *rows[i].first : reference[i].region_id, std::move(rows[i].second)});
  return out;
}

int cmd_eval(const EvalOptions& o, Io& io, std::ostream& out, std::ostream& err) {
  Lexicon lex = load_lexicon(io, o.lexicon);
  auto reference = load_regions(io, o.ref, err, true);
  auto predicted = read_predictions(io.slurp(o.pred), reference);
  if (!o.split.empty()) {
    reference = restrict_to_eval(reference, o.split);
    std::set<std::int64_t> keep;
    for (const auto& r : reference) keep.insert(r.region_id);
    std::erase_if(predicted, [&](const PredictedGraph& p) { return !keep.count(p.region_id); });
  }
  CorpusReport report = evaluate_corpus(predicted, reference, lex,
                                        o.mode == "limited" ? CorpusMode::Limited : CorpusMode::Base, o.clamp_pred);
  if (!o.out.empty()) {
    std::ostream& os = io.output(o.out);
    for (const auto& r : report.regions) os << to_json(r).dump() << "\n";
    os << report.aggregate_json().dump() << "\n";
  }
  out << report.aggregate_json().dump() << "\n";
  return kExitOk;
}

struct ConvertOptions {
  std::string in_format = "conll", out_format = "graph-json", input = "-", output = "-", lexicon;
};

int cmd_convert(const ConvertOptions& o, Io& io, std::ostream& err) {
  if (o.in_format == "conll" && o.out_format == "graph-json") {
    auto sentences = read_conll(io.slurp(o.input));
    std::ostream& os = io.output(o.output);
    std::int64_t n = 0;
    for (const auto& s : sentences) {
      std::string phrase;
      for (const auto& t : s.tokens) phrase += (phrase.empty() ? "" : " ") + t.form;
      os << graph_line(++n, phrase, decode_tags_to_graph(s).graph).dump() << "\n";
    }
    return kExitOk;
  }
  if (o.in_format == "regions" && o.out_format == "conll") {
    Lexicon lex = load_lexicon(io, o.lexicon);
    auto regions = load_regions(io, o.input, err, false);
    std::vector<TaggedSentence> tagged;
    for (const auto& r : regions) tagged.push_back(align(r.description, r.graph, lex).tagged);
    io.output(o.output) << write_conll(tagged);
    return kExitOk;
  }
  throw CLI::ValidationError("--in/--out", "supported conversions: conll -> graph-json, regions -> conll");
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scene-graph parsing with an attention-graph transformer head", "sgforge"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic regions file");
  g->add_option("--grammar", gen.grammar, "Grammar JSON (default: built-in grammar)")->check(CLI::ExistingFile);
  g->add_option("--n", gen.n, "Number of regions")->required();
  g->add_option("--seed", gen.seed, "Override the grammar seed");
  g->add_option("--out", gen.out, "Regions JSON-lines output ('-' for stdout)")->required();
  g->add_option("--split-out", gen.split_out, "Also write an image-level train/eval split spec");
  g->add_option("--dev-fraction", gen.dev_fraction, "Fraction of images held out for eval")->check(CLI::Range(0.0, 1.0));

  AlignOptions al;
  auto* a = app.add_subcommand("align", "Align region graphs to their descriptions (oracle CONLL targets)");
  a->add_option("--regions", al.regions, "Regions JSON-lines file")->required();
  a->add_option("--lexicon", al.lexicon, "Synonym lexicon JSON");
  a->add_option("--out", al.out, "CONLL output ('-' for stdout)")->required();
  a->add_option("--report", al.report, "Per-region coverage report (JSON lines)");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train the attention-graph model");
  t->add_option("--conll", tr.conll, "Oracle CONLL targets, one sentence per region")->required();
  t->add_option("--regions", tr.regions, "Regions JSON-lines file matching --conll")->required();
  t->add_option("--model-config", tr.model_config, "Model config JSON");
  t->add_option("--train-config", tr.train_config, "Training config JSON");
  t->add_option("--split", tr.split, "Split spec; eval images become the dev set");
  t->add_option("--seed", tr.seed, "Override the training seed");
  t->add_option("--out", tr.out, "Checkpoint directory (best-dev copy in <out>/best)")->required();

  ParseOptions pa;
  auto* p = app.add_subcommand("parse", "Parse descriptions into scene graphs");
  p->add_option("--ckpt", pa.ckpt, "Checkpoint directory")->required();
  p->add_option("--input", pa.input, "Descriptions: text lines or regions JSON lines ('-' for stdin)");
  p->add_option("--input-format", pa.input_format, "auto, text or regions")->check(CLI::IsMember({"auto", "text", "regions"}));
  p->add_option("--out", pa.format, "Output format")->check(CLI::IsMember({"conll", "graph-json"}));
  p->add_option("--output", pa.output, "Output path ('-' for stdout)");
  p->add_option("--split", pa.split, "With regions input, parse only the split's eval images");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Score predicted graphs against reference regions");
  e->add_option("--pred", ev.pred, "Predicted graphs, JSON lines ('-' for stdin)")->required();
  e->add_option("--ref", ev.ref, "Reference regions JSON-lines file")->required();
  e->add_option("--mode", ev.mode, "Scoring mode")->check(CLI::IsMember({"base", "limited"}));
  e->add_option("--lexicon", ev.lexicon, "Synonym lexicon JSON");
  e->add_option("--split", ev.split, "Score only the split's eval images");
  e->add_flag("--clamp-pred", ev.clamp_pred, "Limited mode: also cap the prediction side");
  e->add_option("--out", ev.out, "Per-region report (JSON lines)");

  ConvertOptions cv;
  auto* c = app.add_subcommand("convert", "Convert CONLL to graphs (decode) or regions to CONLL (align)");
  c->add_option("--in", cv.in_format, "Input format")->check(CLI::IsMember({"conll", "regions"}));
  c->add_option("--out", cv.out_format, "Output format")->check(CLI::IsMember({"graph-json", "conll"}));
  c->add_option("--input", cv.input, "Input path ('-' for stdin)");
  c->add_option("--output", cv.output, "Output path ('-' for stdout)");
  c->add_option("--lexicon", cv.lexicon, "Synonym lexicon JSON (regions -> conll)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Io io(in, out);
  try {
    if (*g) return cmd_gen(gen, io, out);
    if (*a) return cmd_align(al, io, out, err);
    if (*t) return cmd_train(tr, io, out, err);
    if (*p) return cmd_parse(pa, io, err);
    if (*e) return cmd_eval(ev, io, out, err);
    if (*c) return cmd_convert(cv, io, err);
  } catch (const CLI::ValidationError& ex) {
    err << "sgforge: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const Error& ex) {
    err << "sgforge: " << ex.what() << "\n";
    return kExitData;
  } catch (const std::exception& ex) {
    err << "sgforge: " << ex.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace sgforge::cli
