#pragma once

// Directed sentence graphs: sentences are nodes, and a forward edge u -> v
// (u < v) joins two sentences whose most similar noun pair exceeds a
// cosine-similarity threshold.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cohgraph/corpus.hpp"

namespace cohgraph {

// Forward-edge graph over nodes 1..n. Edges always satisfy u < v.
class SentenceGraph {
 public:
  SentenceGraph() = default;
  explicit SentenceGraph(int n);

  int size() const { return n_; }

  // Throws ValidationError unless 1 <= u < v <= n.
  void add_edge(int u, int v);
  bool has_edge(int u, int v) const;

  // Sorted lexicographically.
  std::vector<std::pair<int, int>> edges() const;
  std::size_t edge_count() const { return edge_count_; }

  bool operator==(const SentenceGraph&) const = default;

 private:
  std::size_t slot(int u, int v) const {
    return static_cast<std::size_t>(u - 1) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(v - 1);
  }

  int n_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<std::uint8_t> adjacency_;
};

// Similarity threshold; edges need a score strictly above it.
struct SimilarityThreshold {
  double delta = 0.65;

  explicit SimilarityThreshold(double d);
};

// Cosine similarity of two vectors, or nothing when either has zero norm.
std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b);

// Maximum cosine similarity over all (noun of a, noun of b) pairs. Nouns are
// lowercased before lookup; pairs with an out-of-vocabulary noun or a
// zero-norm vector are skipped. Empty when no pair can be scored.
std::optional<double> max_noun_similarity(const Sentence& a, const Sentence& b,
                                          const EmbeddingTable& table);

SentenceGraph build_sentence_graph(const Document& doc, const EmbeddingTable& table,
                                   SimilarityThreshold threshold);

struct SentenceGraphRecord {
  std::string id;
  SentenceGraph graph;
};

// {"id": string, "n": int, "edges": [[u, v], ...]} per line.
void write_sentence_graphs(std::ostream& out, const std::vector<SentenceGraphRecord>& records);
std::vector<SentenceGraphRecord> parse_sentence_graphs(std::istream& in, const std::string& source);

}  // namespace cohgraph
