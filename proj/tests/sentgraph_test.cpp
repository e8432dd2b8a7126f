#include "cohgraph/sentgraph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cohgraph/error.hpp"
#include "cohgraph/random.hpp"

namespace cohgraph {
namespace {

Sentence sentence(int index, std::vector<std::string> nouns) {
  return Sentence{index, std::move(nouns), std::nullopt};
}

Document document(std::vector<std::vector<std::string>> nouns) {
  Document d;
  d.id = "doc";
  for (std::size_t i = 0; i < nouns.size(); ++i) {
    d.sentences.push_back(sentence(static_cast<int>(i + 1), nouns[i]));
  }
  return d;
}

TEST(MaxNounSimilarity, IdenticalNoun) {
  EmbeddingTable t;
  t.insert("dog", {0.3, -2.0, 1.0});
  const auto s = max_noun_similarity(sentence(1, {"dog"}), sentence(2, {"dog"}), t);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(*s, 1.0, 1e-15);
}

TEST(MaxNounSimilarity, EmptyNounListIsAbsent) {
  EmbeddingTable t;
  t.insert("dog", {1.0, 0.0});
  EXPECT_FALSE(max_noun_similarity(sentence(1, {}), sentence(2, {"dog"}), t).has_value());
}

TEST(MaxNounSimilarity, HandComputedMaximum) {
  EmbeddingTable t;
  t.insert("a", {1.0, 0.0});
  t.insert("b", {0.0, 1.0});
  t.insert("c", {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  const auto s = max_noun_similarity(sentence(1, {"a"}), sentence(2, {"b", "c"}), t);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(*s, 0.70710678118654752, 1e-12);
}

TEST(MaxNounSimilarity, SkipsOutOfVocabularyAndZeroVectors) {
  EmbeddingTable t;
  t.insert("a", {1.0, 0.0});
  t.insert("zero", {0.0, 0.0});
  EXPECT_FALSE(max_noun_similarity(sentence(1, {"a"}), sentence(2, {"zero", "oov"}), t));
  const auto s = max_noun_similarity(sentence(1, {"a"}), sentence(2, {"zero", "a"}), t);
  ASSERT_TRUE(s.has_value());
  EXPECT_DOUBLE_EQ(*s, 1.0);
}

TEST(MaxNounSimilarity, LowercasesBeforeLookup) {
  EmbeddingTable t;
  t.insert("dog", {1.0, 2.0});
  EXPECT_TRUE(max_noun_similarity(sentence(1, {"Dog"}), sentence(2, {"DOG"}), t).has_value());
}

TEST(BuildSentenceGraph, SingleSentence) {
  EmbeddingTable t;
  t.insert("dog", {1.0});
  const auto g = build_sentence_graph(document({{"dog"}}), t, SimilarityThreshold(0.65));
  EXPECT_EQ(g.size(), 1);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildSentenceGraph, SharedNounMakesEdge) {
  EmbeddingTable t;
  t.insert("dog", {0.2, 0.9});
  const auto g = build_sentence_graph(document({{"dog"}, {"dog"}}), t, SimilarityThreshold(0.65));
  EXPECT_EQ(g.edges(), (std::vector<std::pair<int, int>>{{1, 2}}));
}

TEST(BuildSentenceGraph, HandEvaluatedTriple) {
  EmbeddingTable t;
  t.insert("a", {1.0, 0.0});
  t.insert("b", {0.0, 1.0});
  const auto g =
      build_sentence_graph(document({{"a"}, {"b"}, {"a"}}), t, SimilarityThreshold(0.65));
  EXPECT_EQ(g.edges(), (std::vector<std::pair<int, int>>{{1, 3}}));
}

TEST(BuildSentenceGraph, TieAtThresholdMakesNoEdge) {
  EmbeddingTable t;
  t.insert("a", {1.0, 0.0});
  t.insert("b", {1.0, 0.0});
  EXPECT_EQ(build_sentence_graph(document({{"a"}, {"b"}}), t, SimilarityThreshold(1.0)).edge_count(),
            0u);
}

TEST(BuildSentenceGraph, EmptyDocumentRejected) {
  EmbeddingTable t;
  t.insert("a", {1.0});
  EXPECT_THROW(build_sentence_graph(document({}), t, SimilarityThreshold(0.5)), ValidationError);
}

TEST(SimilarityThreshold, Range) {
  EXPECT_THROW(SimilarityThreshold(0.0), ValidationError);
  EXPECT_THROW(SimilarityThreshold(1.5), ValidationError);
  EXPECT_NO_THROW(SimilarityThreshold(1.0));
}

TEST(SentenceGraph, RejectsNonForwardEdges) {
  SentenceGraph g(3);
  EXPECT_THROW(g.add_edge(2, 1), ValidationError);
  EXPECT_THROW(g.add_edge(2, 2), ValidationError);
  EXPECT_THROW(g.add_edge(1, 4), ValidationError);
  g.add_edge(1, 2);
  g.add_edge(1, 2);
  EXPECT_EQ(g.edge_count(), 1u);
}

// Random documents over a small random vocabulary.
struct RandomInstance {
  EmbeddingTable table;
  Document doc;
};

RandomInstance random_instance(Rng& rng) {
  RandomInstance inst;
  const int vocab = 8;
  for (int i = 0; i < vocab; ++i) {
    inst.table.insert("w" + std::to_string(i), {rng.normal(), rng.normal(), rng.normal()});
  }
  const int n = 1 + static_cast<int>(rng.below(9));
  std::vector<std::vector<std::string>> nouns(static_cast<std::size_t>(n));
  for (auto& s : nouns) {
    for (std::uint64_t k = rng.below(4); k > 0; --k) {
      s.push_back(rng.bernoulli(0.1) ? "oov" : "w" + std::to_string(rng.below(vocab)));
    }
  }
  inst.doc = document(nouns);
  return inst;
}

TEST(BuildSentenceGraph, Properties) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = random_instance(rng);
    const double d1 = rng.uniform(0.05, 0.9);
    const double d2 = rng.uniform(d1, 1.0);
    const auto low = build_sentence_graph(inst.doc, inst.table, SimilarityThreshold(d1));
    const auto high = build_sentence_graph(inst.doc, inst.table, SimilarityThreshold(d2));

    EXPECT_EQ(low.size(), static_cast<int>(inst.doc.sentence_count()));
    for (const auto& [u, v] : low.edges()) {
      EXPECT_LT(u, v);
    }
    for (const auto& [u, v] : high.edges()) {
      EXPECT_TRUE(low.has_edge(u, v)) << "monotonicity in the threshold";
    }

    Document shuffled = inst.doc;
    for (auto& s : shuffled.sentences) rng.shuffle(s.nouns);
    EXPECT_EQ(build_sentence_graph(shuffled, inst.table, SimilarityThreshold(d1)), low);

    // Tokens absent from every sentence never change the graph.
    EmbeddingTable extended = inst.table;
    extended.insert("unused", {1.0, 1.0, 1.0});
    EXPECT_EQ(build_sentence_graph(inst.doc, extended, SimilarityThreshold(d1)), low);
  }
}

TEST(SentenceGraphCache, RoundTrip) {
  SentenceGraph g(4);
  g.add_edge(1, 3);
  g.add_edge(2, 4);
  std::ostringstream out;
  write_sentence_graphs(out, {{"x", g}, {"y", SentenceGraph(1)}});
  EXPECT_EQ(out.str(), "{\"edges\":[[1,3],[2,4]],\"id\":\"x\",\"n\":4}\n"
                       "{\"edges\":[],\"id\":\"y\",\"n\":1}\n");
  std::istringstream in(out.str());
  const auto back = parse_sentence_graphs(in, "g.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].graph, g);
  EXPECT_EQ(back[1].id, "y");

  std::istringstream bad(R"({"id":"z","n":2,"edges":[[2,1]]})"
                         "\n");
  EXPECT_THROW(parse_sentence_graphs(bad, "g.jsonl"), ParseError);
}

}  // namespace
}  // namespace cohgraph
