#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "sgforge/corpus.hpp"
#include "sgforge/graph.hpp"

namespace fs = std::filesystem;
using sgforge::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workdir {
  fs::path root;
  Workdir() : root(fs::temp_directory_path() / ("sgforge_cli_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(root);
  }
  ~Workdir() { fs::remove_all(root); }
  std::string operator/(const std::string& name) const { return (root / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit 1, data errors exit 2") {
  CHECK(call({}).code == sgforge::cli::kExitUsage);
  CHECK(call({"frobnicate"}).code == sgforge::cli::kExitUsage);
  CHECK(call({"eval", "--pred", "x"}).code == sgforge::cli::kExitUsage);
  const Result v = call({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("sgforge 0.1.0") != std::string::npos);

  Workdir w;
  std::ofstream(w / "bad.jsonl") << "{not json\n";
  const Result r = call({"eval", "--pred", w / "bad.jsonl", "--ref", w / "missing.jsonl"});
  CHECK(r.code == sgforge::cli::kExitData);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("eval of a file against itself is perfect") {
  Workdir w;
  REQUIRE(call({"gen", "--n", "40", "--out", w / "r.jsonl"}).code == 0);
  const Result r = call({"eval", "--pred", w / "r.jsonl", "--ref", w / "r.jsonl", "--out", w / "report.jsonl"});
  REQUIRE(r.code == 0);
  const auto agg = nlohmann::json::parse(r.out);
  CHECK(agg["f"] == 1.0);
  CHECK(agg["regions"] == 40);

  std::istringstream report(slurp(w / "report.jsonl"));
  std::size_t lines = 0;
  for (std::string line; std::getline(report, line);) ++lines;
  CHECK(lines == 41);

  const Result lim = call({"eval", "--pred", "-", "--ref", w / "r.jsonl", "--mode", "limited"}, slurp(w / "r.jsonl"));
  REQUIRE(lim.code == 0);
  CHECK(nlohmann::json::parse(lim.out)["f"] == 1.0);
}

TEST_CASE("align then convert reproduces the graphs") {
  Workdir w;
  REQUIRE(call({"gen", "--n", "60", "--seed", "5", "--out", w / "r.jsonl"}).code == 0);
  const Result a = call({"align", "--regions", w / "r.jsonl", "--out", w / "t.conll"});
  REQUIRE(a.code == 0);
  CHECK(nlohmann::json::parse(a.out)["mean_coverage"] == 1.0);

  REQUIRE(call({"convert", "--in", "conll", "--out", "graph-json", "--input", w / "t.conll", "--output", w / "g.jsonl"}).code == 0);
  const Result e = call({"eval", "--pred", w / "g.jsonl", "--ref", w / "r.jsonl"});
  REQUIRE(e.code == 0);
  CHECK(nlohmann::json::parse(e.out)["f"] == 1.0);

  std::ifstream regions(w / "r.jsonl"), graphs(w / "g.jsonl");
  for (std::string rl, gl; std::getline(regions, rl) && std::getline(graphs, gl);) {
    const auto region = sgforge::region_from_json(nlohmann::ordered_json::parse(rl));
    const auto graph = sgforge::graph_from_json(nlohmann::ordered_json::parse(gl));
    CHECK(sgforge::extract_tuples(graph) == sgforge::extract_tuples(region.graph));
  }

  // regions -> conll through convert matches align.
  REQUIRE(call({"convert", "--in", "regions", "--out", "conll", "--input", w / "r.jsonl", "--output", w / "t2.conll"}).code == 0);
  CHECK(slurp(w / "t2.conll") == slurp(w / "t.conll"));
}

TEST_CASE("train, parse and eval end to end") {
  Workdir w;
  REQUIRE(call({"gen", "--n", "100", "--out", w / "r.jsonl", "--split-out", w / "split.json", "--dev-fraction", "0.2"}).code == 0);
  REQUIRE(call({"align", "--regions", w / "r.jsonl", "--out", w / "t.conll"}).code == 0);
  std::ofstream(w / "model.json") << R"({"d_model":16,"n_layers":1,"n_heads":2,"d_ff":32,"d_qk":16,"max_len":12})";
  std::ofstream(w / "train.json") << R"({"epochs":2,"batch_size":16,"learning_rate":0.003})";

  const Result t = call({"train", "--conll", w / "t.conll", "--regions", w / "r.jsonl", "--model-config", w / "model.json",
                         "--train-config", w / "train.json", "--split", w / "split.json", "--out", w / "ckpt"});
  REQUIRE(t.code == 0);
  CHECK(fs::exists(w / "ckpt/manifest.json"));
  CHECK(fs::exists(w / "ckpt/best/tensors.bin"));
  std::istringstream log(t.out);
  std::size_t epochs = 0;
  for (std::string line; std::getline(log, line);)
    if (nlohmann::json::parse(line).contains("epoch")) ++epochs;
  CHECK(epochs == 2);

  const Result p = call({"parse", "--ckpt", w / "ckpt", "--input", w / "r.jsonl", "--split", w / "split.json",
                         "--out", "graph-json", "--output", w / "pred.jsonl"});
  REQUIRE(p.code == 0);
  const Result e = call({"eval", "--pred", w / "pred.jsonl", "--ref", w / "r.jsonl", "--split", w / "split.json"});
  REQUIRE(e.code == 0);
  const double f = nlohmann::json::parse(e.out)["f"];
  CHECK(f >= 0.0);
  CHECK(f <= 1.0);

  const Result text = call({"parse", "--ckpt", w / "ckpt", "--input", "-", "--out", "conll"}, "red cat\nbig dog near the cat\n");
  REQUIRE(text.code == 0);
  CHECK(std::count(text.out.begin(), text.out.end(), '\n') == 2 + 5 + 2);
}

TEST_CASE("train rejects conll that disagrees with the regions") {
  Workdir w;
  REQUIRE(call({"gen", "--n", "5", "--out", w / "r.jsonl"}).code == 0);
  std::ofstream(w / "t.conll") << "1\tcat\t0\t_\tSUBJ\n\n";
  const Result t = call({"train", "--conll", w / "t.conll", "--regions", w / "r.jsonl", "--out", w / "ckpt"});
  CHECK(t.code == sgforge::cli::kExitData);
}
