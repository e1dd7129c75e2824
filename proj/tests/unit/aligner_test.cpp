#include <doctest.h>

#include <random>

#include "sgforge/aligner.hpp"
#include "sgforge/corpus.hpp"

using namespace sgforge;
using NT = NodeType;

namespace {

std::vector<std::tuple<NT, Position>> tags_of(const TaggedSentence& s) {
  std::vector<std::tuple<NT, Position>> out;
  for (const auto& t : s.tokens) out.emplace_back(t.node_type, t.parent);
  return out;
}

// Tuples of `g` restricted to nodes the aligner reported as aligned.
TupleSet aligned_tuples(const SceneGraph& g, const AlignmentResult& a) {
  std::set<std::size_t> bad_obj, bad_attr, bad_rel;
  for (const auto& u : a.unaligned_nodes) {
    if (u.kind == UnalignedNode::Kind::Object) bad_obj.insert(u.index);
    if (u.kind == UnalignedNode::Kind::Attribute) bad_attr.insert(u.index);
    if (u.kind == UnalignedNode::Kind::Relation) bad_rel.insert(u.index);
  }
  std::vector<ObjectInstance> objects;
  std::set<ObjectId> kept;
  for (std::size_t i = 0; i < g.objects().size(); ++i)
    if (!bad_obj.count(i)) {
      objects.push_back(g.objects()[i]);
      kept.insert(g.objects()[i].id);
    }
  std::vector<Attribute> attributes;
  for (std::size_t i = 0; i < g.attributes().size(); ++i)
    if (!bad_attr.count(i) && kept.count(g.attributes()[i].object)) attributes.push_back(g.attributes()[i]);
  std::vector<Relation> relations;
  for (std::size_t i = 0; i < g.relations().size(); ++i) {
    const auto& r = g.relations()[i];
    if (!bad_rel.count(i) && kept.count(r.subject) && kept.count(r.object)) relations.push_back(r);
  }
  return extract_tuples(build_graph(objects, attributes, relations));
}

}  // namespace

TEST_CASE("align attributes onto their object") {
  const SceneGraph g = build_graph({{1, Label("bus")}}, {{1, Label("blue")}, {1, Label("red")}}, {});
  const AlignmentResult a = align("blue and red bus", g);
  CHECK(tags_of(a.tagged) == std::vector<std::tuple<NT, Position>>{
                                 {NT::Attr, 4}, {NT::None, 0}, {NT::Attr, 4}, {NT::Subj, 0}});
  CHECK(a.coverage == 1.0);
  CHECK(a.unaligned_nodes.empty());
  CHECK(extract_tuples(decode_tags_to_graph(a.tagged).graph) == extract_tuples(g));
}

TEST_CASE("align with an empty graph") {
  const AlignmentResult a = align("cat", build_graph({}, {}, {}));
  REQUIRE(a.tagged.size() == 1);
  CHECK(a.tagged.tokens[0].node_type == NT::None);
  CHECK(a.coverage == 1.0);
  CHECK(align("", build_graph({}, {}, {})).tagged.empty());
}

TEST_CASE("align through a synonym") {
  Lexicon lex;
  lex.add("cat", "feline");
  const SceneGraph g = build_graph({{1, Label("cat")}}, {}, {});
  const AlignmentResult a = align("a feline", g, lex);
  CHECK(tags_of(a.tagged) == std::vector<std::tuple<NT, Position>>{{NT::None, 0}, {NT::Subj, 0}});
  CHECK(a.coverage == 1.0);
  const SceneGraph back = decode_tags_to_graph(a.tagged).graph;
  REQUIRE(back.objects().size() == 1);
  CHECK(back.objects()[0].label.text() == "feline");
  CHECK(lex.synonymous(back.objects()[0].label.text(), "cat"));
  CHECK(align("a feline", g).coverage == 0.0);
}

TEST_CASE("multi-word relation becomes same pieces") {
  const SceneGraph g = build_graph({{1, Label("man")}, {2, Label("car")}}, {}, {{1, Label("in front of"), 2}});
  const AlignmentResult a = align("man in front of the car", g);
  CHECK(tags_of(a.tagged) == std::vector<std::tuple<NT, Position>>{
                                 {NT::Subj, 0}, {NT::Same, 4}, {NT::Same, 4}, {NT::Pred, 1}, {NT::None, 0}, {NT::Objt, 4}});
  CHECK(extract_tuples(decode_tags_to_graph(a.tagged).graph) == extract_tuples(g));
}

TEST_CASE("unrepresentable nodes are reported") {
  SUBCASE("missing words") {
    const SceneGraph g = build_graph({{1, Label("dog")}, {2, Label("cat")}}, {{1, Label("big")}}, {{1, Label("near"), 2}});
    const AlignmentResult a = align("dog", g);
    CHECK(a.coverage == doctest::Approx(1.0 / 4.0));
    CHECK(a.unaligned_nodes.size() == 3);
  }
  SUBCASE("dual role object") {
    // man holds cup, woman is near man: man is both subject and object.
    const SceneGraph g = build_graph({{1, Label("woman")}, {2, Label("man")}, {3, Label("cup")}}, {},
                                     {{1, Label("near"), 2}, {2, Label("holding"), 3}});
    const AlignmentResult a = align("woman near man holding cup", g);
    CHECK(a.tagged.at(3).node_type == NT::Subj);
    REQUIRE(a.unaligned_nodes.size() == 1);
    CHECK(a.unaligned_nodes[0].kind == UnalignedNode::Kind::Relation);
    CHECK(a.unaligned_nodes[0].index == 0);
    CHECK(a.coverage == doctest::Approx(4.0 / 5.0));
  }
}

TEST_CASE("useful word counts") {
  CHECK(useful_word_count("blue and red bus") == 3);
  CHECK(useful_word_count("a the and an") == 0);
  CHECK(useful_word_count("cat") == 1);
  CHECK(useful_word_count("The  Cat") == 1);
}

TEST_CASE("synthetic corpus aligns and decodes back exactly") {
  const auto regions = generate_synthetic(SyntheticGrammar::default_grammar(), 400);
  for (const auto& r : regions) {
    const AlignmentResult a = align(r.description, r.graph);
    CHECK(a.coverage == 1.0);
    const DecodeReport d = decode_tags_to_graph(a.tagged);
    CHECK(d.dropped_arcs.empty());
    CHECK(extract_tuples(d.graph) == extract_tuples(r.graph));
  }
}

TEST_CASE("random graphs: decoded tuples come from aligned nodes") {
  const std::vector<std::string> words = {"cat", "dog", "red", "big", "on", "near", "the", "in front of", "top"};
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<ObjectInstance> objects;
    const std::size_t n_obj = rng() % 4;
    for (std::size_t i = 0; i < n_obj; ++i) objects.push_back({static_cast<ObjectId>(i + 1), Label(words[rng() % 4])});
    std::vector<Attribute> attributes;
    std::vector<Relation> relations;
    if (n_obj > 0) {
      for (std::size_t i = 0, k = rng() % 3; i < k; ++i)
        attributes.push_back({static_cast<ObjectId>(1 + rng() % n_obj), Label(words[2 + rng() % 2])});
      for (std::size_t i = 0, k = rng() % 3; i < k; ++i)
        relations.push_back({static_cast<ObjectId>(1 + rng() % n_obj), Label(words[4 + rng() % 5]),
                             static_cast<ObjectId>(1 + rng() % n_obj)});
    }
    const SceneGraph g = build_graph(objects, attributes, relations);
    std::string text;
    for (std::size_t i = 0, len = rng() % 9; i < len; ++i) text += words[rng() % words.size()] + " ";

    const AlignmentResult a = align(text, g);
    CHECK(a.coverage >= 0.0);
    CHECK(a.coverage <= 1.0);
    const TupleSet decoded = extract_tuples(decode_tags_to_graph(a.tagged).graph);
    CHECK(decoded.subset_of(aligned_tuples(g, a)));
    CHECK(decode_tags_to_graph(a.tagged).dropped_arcs.empty());
    CHECK(tags_of(align(text, g).tagged) == tags_of(a.tagged));
  }
}
