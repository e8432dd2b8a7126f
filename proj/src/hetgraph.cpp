#include "cohgraph/hetgraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cohgraph/error.hpp"
#include "jsonl.hpp"

namespace cohgraph {

using nlohmann::json;

int SubgraphVocabulary::index_of(const Signature& sig) const {
  const auto it = std::lower_bound(signatures.begin(), signatures.end(), sig);
  if (it == signatures.end() || *it != sig) return -1;
  return static_cast<int>(it - signatures.begin());
}

int SubgraphVocabulary::co_frequency(int a, int b) const {
  if (a > b) std::swap(a, b);
  const auto it = co_document_frequency.find({a, b});
  return it == co_document_frequency.end() ? 0 : it->second;
}

namespace {

int common_k(std::span<const SubgraphSet> sets) {
  int k = 0;
  for (const auto& s : sets) {
    if (s.empty()) continue;
    if (k != 0 && s.k != k) {
      throw ValidationError("subgraph sets mix k=" + std::to_string(k) + " and k=" +
                            std::to_string(s.k));
    }
    k = s.k;
  }
  return k;
}

// Vocabulary indices present in `set`, ascending.
std::vector<int> present_types(const SubgraphVocabulary& vocab, const SubgraphSet& set) {
  std::vector<int> out;
  for (const auto& [sig, n] : set.counts) {
    if (n <= 0) continue;
    const int j = vocab.index_of(sig);
    if (j >= 0) out.push_back(j);
  }
  return out;
}

// Known-type total of `set`: the normalized-frequency denominator.
long long known_total(const SubgraphVocabulary& vocab, const SubgraphSet& set) {
  long long total = 0;
  for (const auto& [sig, n] : set.counts) {
    if (vocab.index_of(sig) >= 0) total += n;
  }
  return total;
}

}  // namespace

SubgraphVocabulary build_vocabulary(std::span<const SubgraphSet> sets) {
  SubgraphVocabulary vocab;
  vocab.k = common_k(sets);
  vocab.num_documents = static_cast<int>(sets.size());

  std::set<Signature> all;
  for (const auto& s : sets) {
    for (const auto& [sig, n] : s.counts) {
      if (n > 0) all.insert(sig);
    }
  }
  vocab.signatures.assign(all.begin(), all.end());
  vocab.document_frequency.assign(vocab.signatures.size(), 0);

  for (const auto& s : sets) {
    const auto present = present_types(vocab, s);
    for (std::size_t a = 0; a < present.size(); ++a) {
      ++vocab.document_frequency[static_cast<std::size_t>(present[a])];
      for (std::size_t b = a + 1; b < present.size(); ++b) {
        ++vocab.co_document_frequency[{present[a], present[b]}];
      }
    }
  }
  return vocab;
}

double doc_subgraph_weight(long long f, long long total, int df, int num_documents) {
  if (f <= 0 || total < f || df < 1 || df > num_documents) {
    throw ValidationError("doc_subgraph_weight requires 0 < f <= total and 1 <= df <= N");
  }
  return (static_cast<double>(f) / static_cast<double>(total)) *
         std::log(static_cast<double>(num_documents) / static_cast<double>(df));
}

double pmi_weight(int df_a, int df_b, int codf, int num_documents) {
  if (codf < 1 || df_a < codf || df_b < codf || num_documents < std::max(df_a, df_b)) {
    throw ValidationError("pmi_weight requires 1 <= codf <= min(df) and max(df) <= N");
  }
  const double n = num_documents;
  const double joint = codf / n;
  const double marginal = (df_a / n) * (df_b / n);
  return std::max(0.0, std::log(joint / marginal));
}

HeteroGraph build_hetero_graph(const SubgraphVocabulary& vocab, std::span<const SubgraphSet> sets,
                               EdgeFlags flags) {
  if (static_cast<int>(sets.size()) != vocab.num_documents) {
    throw ValidationError("vocabulary was built from a different number of documents");
  }
  HeteroGraph g;
  g.num_documents = vocab.num_documents;
  g.num_subgraphs = vocab.size();
  g.flags = flags;
  g.adjacency = Eigen::MatrixXd::Zero(g.order(), g.order());

  if (flags.doc_subgraph) {
    for (int i = 0; i < g.num_documents; ++i) {
      const auto& set = sets[static_cast<std::size_t>(i)];
      const long long total = known_total(vocab, set);
      for (const auto& [sig, f] : set.counts) {
        const int j = vocab.index_of(sig);
        if (j < 0 || f <= 0) {
          throw ValidationError("subgraph set contains a type missing from the vocabulary");
        }
        const double w = doc_subgraph_weight(f, total, vocab.document_frequency[j], vocab.num_documents);
        g.adjacency(i, g.subgraph_node(j)) = w;
        g.adjacency(g.subgraph_node(j), i) = w;
      }
    }
  }
  if (flags.subgraph_subgraph) {
    for (const auto& [pair, codf] : vocab.co_document_frequency) {
      const auto [a, b] = pair;
      const double w = pmi_weight(vocab.document_frequency[a], vocab.document_frequency[b], codf,
                                  vocab.num_documents);
      g.adjacency(g.subgraph_node(a), g.subgraph_node(b)) = w;
      g.adjacency(g.subgraph_node(b), g.subgraph_node(a)) = w;
    }
  }
  return g;
}

HeteroGraph attach_document(const HeteroGraph& graph, const SubgraphVocabulary& vocab,
                            const SubgraphSet& doc_set) {
  if (graph.num_subgraphs != vocab.size()) {
    throw ValidationError("graph and vocabulary disagree on the number of subgraph types");
  }
  const int n = graph.num_documents;
  const int m = graph.num_subgraphs;
  HeteroGraph out;
  out.num_documents = n + 1;
  out.num_subgraphs = m;
  out.flags = graph.flags;
  out.adjacency = Eigen::MatrixXd::Zero(out.order(), out.order());
  // Documents keep their indices; subgraph nodes shift down by one.
  out.adjacency.topLeftCorner(n, n) = graph.adjacency.topLeftCorner(n, n);
  out.adjacency.block(0, n + 1, n, m) = graph.adjacency.block(0, n, n, m);
  out.adjacency.block(n + 1, 0, m, n) = graph.adjacency.block(n, 0, m, n);
  out.adjacency.bottomRightCorner(m, m) = graph.adjacency.bottomRightCorner(m, m);

  if (!graph.flags.doc_subgraph) return out;
  const long long total = known_total(vocab, doc_set);
  for (const auto& [sig, f] : doc_set.counts) {
    const int j = vocab.index_of(sig);
    if (j < 0 || f <= 0) continue;
    const double w = doc_subgraph_weight(f, total, vocab.document_frequency[j], vocab.num_documents);
    out.adjacency(n, out.subgraph_node(j)) = w;
    out.adjacency(out.subgraph_node(j), n) = w;
  }
  return out;
}

PropagationMatrix normalize(const HeteroGraph& graph) {
  const Eigen::Index n = graph.order();
  const auto& a = graph.adjacency;
  // Row sums of A + I accumulated left to right, matching normalize_sparse.
  Eigen::VectorXd inv_sqrt_degree(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) d += (i == j) ? a(i, j) + 1.0 : a(i, j);
    inv_sqrt_degree(i) = 1.0 / std::sqrt(d);
  }
  PropagationMatrix p;
  p.matrix.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double tilde = (i == j) ? a(i, j) + 1.0 : a(i, j);
      p.matrix(i, j) = tilde * (inv_sqrt_degree(i) * inv_sqrt_degree(j));
    }
  }
  return p;
}

std::vector<WeightedEdge> edge_list(const HeteroGraph& graph) {
  std::vector<WeightedEdge> out;
  for (int i = 0; i < graph.order(); ++i) {
    for (int j = i + 1; j < graph.order(); ++j) {
      if (graph.adjacency(i, j) != 0.0) out.push_back({i, j, graph.adjacency(i, j)});
    }
  }
  return out;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> normalize_sparse(int order,
                                                              std::span<const WeightedEdge> edges) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2 + static_cast<std::size_t>(order));
  for (const auto& e : edges) {
    if (e.from == e.to || e.from < 0 || e.to < 0 || e.from >= order || e.to >= order) {
      throw ValidationError("edge list entry out of range or on the diagonal");
    }
    triplets.emplace_back(e.from, e.to, e.weight);
    triplets.emplace_back(e.to, e.from, e.weight);
  }
  for (int i = 0; i < order; ++i) triplets.emplace_back(i, i, 1.0);
  Eigen::SparseMatrix<double, Eigen::RowMajor> tilde(order, order);
  tilde.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd inv_sqrt_degree(order);
  for (int i = 0; i < order; ++i) {
    double d = 0.0;
    for (decltype(tilde)::InnerIterator it(tilde, i); it; ++it) d += it.value();
    inv_sqrt_degree(i) = 1.0 / std::sqrt(d);
  }
  for (int i = 0; i < order; ++i) {
    for (decltype(tilde)::InnerIterator it(tilde, i); it; ++it) {
      it.valueRef() = it.value() * (inv_sqrt_degree(it.row()) * inv_sqrt_degree(it.col()));
    }
  }
  return tilde;
}

void write_graph_dump(std::ostream& out, const HeteroGraph& graph, const SubgraphVocabulary& vocab) {
  json sigs = json::array();
  for (const auto& s : vocab.signatures) sigs.push_back(s.to_string());
  json edges = json::array();
  for (const auto& e : edge_list(graph)) edges.push_back({e.from, e.to, e.weight});
  out << detail::dump_line(json{{"N", graph.num_documents},
                                {"M", graph.num_subgraphs},
                                {"signatures", sigs},
                                {"edges", edges}})
      << '\n';
}

}  // namespace cohgraph
