#pragma once

// k-node subgraph census of sentence graphs, with isomorphism classes
// identified by a permutation-minimal adjacency code.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cohgraph/sentgraph.hpp"

namespace cohgraph {

inline constexpr int kMaxSubgraphSize = 6;

// Isomorphism-class identifier of a k-node directed graph.
//
// The code is the k*k adjacency matrix read row-major as a bitstring
// b_0 .. b_{k*k-1} (b_{i*k+j} = 1 iff edge i -> j, nodes 0-based), with b_0
// as the most significant bit, minimized over all k! relabelings. Text form
// is "k:" followed by ceil(k*k/4) lowercase, zero-padded hex digits.
struct Signature {
  int k = 0;
  std::uint64_t code = 0;

  auto operator<=>(const Signature&) const = default;

  std::string to_string() const;
  static Signature parse(const std::string& text);
};

// Edges use nodes 1..k. Throws UnsupportedError for k > 6, ValidationError
// for out-of-range endpoints or self-loops.
Signature canonical_signature(int k, const std::vector<std::pair<int, int>>& edges);

// Signature of the forward-edge graph on k ordered nodes whose edge set is
// `mask`: bit t stands for the t-th pair (p, q), p < q, in lexicographic order
// (0,1), (0,2), ..., (0,k-1), (1,2), ... Uses a per-k lookup table.
Signature forward_signature(int k, std::uint32_t mask);

// Number of isomorphism classes among the 2^(k(k-1)/2) forward-edge graphs on
// k ordered nodes (2 <= k <= 6).
int count_dag_classes(int k);

enum class CensusMode {
  faithful,    // strided windows of w nodes, stride w - k + 1
  exhaustive,  // every k-subset whose index span (max - min) is at most w
};

std::string to_string(CensusMode mode);
CensusMode parse_census_mode(const std::string& text);

struct CensusConfig {
  int k = 4;
  int w = 8;
  CensusMode mode = CensusMode::faithful;

  // Throws ValidationError unless 2 <= k <= 6 and w >= k.
  void validate() const;
};

struct SubgraphSet {
  int k = 0;
  std::map<Signature, long long> counts;

  long long total() const;
  bool empty() const { return counts.empty(); }
  long long count(const Signature& s) const {
    const auto it = counts.find(s);
    return it == counts.end() ? 0 : it->second;
  }

  bool operator==(const SubgraphSet&) const = default;
};

// Counts induced k-node subgraphs (connected or not). A graph with fewer
// than k nodes yields an empty set.
SubgraphSet mine_subgraphs(const SentenceGraph& graph, const CensusConfig& cfg);

struct SubgraphSetRecord {
  std::string id;
  SubgraphSet set;
};

// {"id": string, "k": int, "counts": {signature: int}} per line.
void write_subgraph_sets(std::ostream& out, const std::vector<SubgraphSetRecord>& records);
std::vector<SubgraphSetRecord> parse_subgraph_sets(std::istream& in, const std::string& source);

}  // namespace cohgraph
