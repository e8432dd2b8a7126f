#pragma once

// Corpus-level graph over documents and subgraph types.
//
// Node order: documents 0..N-1, then subgraph types N..N+M-1 in vocabulary
// order. Document-subgraph edges carry normalized frequency times inverse
// document frequency; subgraph-subgraph edges carry positive PMI over
// document co-occurrence. Logarithms are natural.

#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cohgraph/census.hpp"

namespace cohgraph {

struct SubgraphVocabulary {
  int k = 0;
  int num_documents = 0;                // N
  std::vector<Signature> signatures;    // sorted
  std::vector<int> document_frequency;  // df_j
  // codf over co-occurring pairs (j, j'), j < j'.
  std::map<std::pair<int, int>, int> co_document_frequency;

  int size() const { return static_cast<int>(signatures.size()); }
  // Vocabulary index of `sig`, or -1.
  int index_of(const Signature& sig) const;
  int co_frequency(int a, int b) const;
};

// Every set must share one k (empty sets are exempt). Throws ValidationError otherwise.
SubgraphVocabulary build_vocabulary(std::span<const SubgraphSet> sets);

// (f / total) * ln(N / df).
double doc_subgraph_weight(long long f, long long total, int df, int num_documents);

// max(0, ln((codf / N) / ((df_a / N) * (df_b / N)))).
double pmi_weight(int df_a, int df_b, int codf, int num_documents);

struct EdgeFlags {
  bool doc_subgraph = true;
  bool subgraph_subgraph = true;
};

struct HeteroGraph {
  int num_documents = 0;  // N
  int num_subgraphs = 0;  // M
  EdgeFlags flags;
  Eigen::MatrixXd adjacency;  // order N + M, symmetric, zero diagonal

  int order() const { return num_documents + num_subgraphs; }
  int subgraph_node(int j) const { return num_documents + j; }
};

// `sets[i]` belongs to document node i; `vocab` must come from the same sets.
HeteroGraph build_hetero_graph(const SubgraphVocabulary& vocab, std::span<const SubgraphSet> sets,
                               EdgeFlags flags = {});

// Returns a graph with one more document node (index N) linked to the known
// subgraph types of `doc_set`. Frequencies are normalized over known types
// only, and IDF uses the training N and df. Existing entries are copied
// unchanged.
HeteroGraph attach_document(const HeteroGraph& graph, const SubgraphVocabulary& vocab,
                            const SubgraphSet& doc_set);

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
struct PropagationMatrix {
  Eigen::MatrixXd matrix;

  Eigen::Index order() const { return matrix.rows(); }
  static PropagationMatrix identity(Eigen::Index n) {
    return PropagationMatrix{Eigen::MatrixXd::Identity(n, n)};
  }
};

PropagationMatrix normalize(const HeteroGraph& graph);

// Coordinate-list form of the upper triangle (i < j), for large corpora.
struct WeightedEdge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
};

std::vector<WeightedEdge> edge_list(const HeteroGraph& graph);

// Same entries as normalize() on the dense adjacency, built from edges only.
Eigen::SparseMatrix<double, Eigen::RowMajor> normalize_sparse(int order,
                                                              std::span<const WeightedEdge> edges);

// {"N", "M", "signatures": [...], "edges": [[i, j, weight], ...]} as one line.
void write_graph_dump(std::ostream& out, const HeteroGraph& graph, const SubgraphVocabulary& vocab);

}  // namespace cohgraph
