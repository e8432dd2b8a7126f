#include "cohgraph/sentgraph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cohgraph/error.hpp"
#include "jsonl.hpp"

namespace cohgraph {

using nlohmann::json;

SentenceGraph::SentenceGraph(int n) : n_(n) {
  if (n < 0) throw ValidationError("sentence graph size must be non-negative");
  adjacency_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
}

void SentenceGraph::add_edge(int u, int v) {
  if (u < 1 || v > n_ || u >= v) {
    throw ValidationError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                          ") is not a forward edge in a graph of " + std::to_string(n_) + " nodes");
  }
  auto& cell = adjacency_[slot(u, v)];
  if (!cell) {
    cell = 1;
    ++edge_count_;
  }
}

bool SentenceGraph::has_edge(int u, int v) const {
  if (u < 1 || v < 1 || u > n_ || v > n_) return false;
  return adjacency_[slot(u, v)] != 0;
}

std::vector<std::pair<int, int>> SentenceGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count_);
  for (int u = 1; u <= n_; ++u) {
    for (int v = u + 1; v <= n_; ++v) {
      if (adjacency_[slot(u, v)]) out.emplace_back(u, v);
    }
  }
  return out;
}

SimilarityThreshold::SimilarityThreshold(double d) : delta(d) {
  if (!(d > 0.0 && d <= 1.0)) throw ValidationError("similarity threshold must lie in (0, 1]");
}

std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine of vectors with different dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::span<const double>> lookup_all(const Sentence& s, const EmbeddingTable& table) {
  std::vector<std::span<const double>> out;
  out.reserve(s.nouns.size());
  for (const auto& noun : s.nouns) {
    if (auto vec = table.find(lowercase(noun))) out.push_back(*vec);
  }
  return out;
}

std::optional<double> max_similarity(const std::vector<std::span<const double>>& a,
                                     const std::vector<std::span<const double>>& b) {
  std::optional<double> best;
  for (const auto& x : a) {
    for (const auto& y : b) {
      const auto score = cosine_similarity(x, y);
      if (score && (!best || *score > *best)) best = score;
    }
  }
  return best;
}

}  // namespace

std::optional<double> max_noun_similarity(const Sentence& a, const Sentence& b,
                                          const EmbeddingTable& table) {
  return max_similarity(lookup_all(a, table), lookup_all(b, table));
}

SentenceGraph build_sentence_graph(const Document& doc, const EmbeddingTable& table,
                                   SimilarityThreshold threshold) {
  if (doc.sentences.empty()) {
    throw ValidationError("document \"" + doc.id + "\" has no sentences");
  }
  const int n = static_cast<int>(doc.sentences.size());
  std::vector<std::vector<std::span<const double>>> vectors;
  vectors.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) vectors.push_back(lookup_all(s, table));

  SentenceGraph graph(n);
  for (int u = 1; u < n; ++u) {
    for (int v = u + 1; v <= n; ++v) {
      const auto score = max_similarity(vectors[u - 1], vectors[v - 1]);
      if (score && *score > threshold.delta) graph.add_edge(u, v);
    }
  }
  return graph;
}

void write_sentence_graphs(std::ostream& out, const std::vector<SentenceGraphRecord>& records) {
  for (const auto& r : records) {
    json edges = json::array();
    for (const auto& [u, v] : r.graph.edges()) edges.push_back({u, v});
    out << detail::dump_line(json{{"id", r.id}, {"n", r.graph.size()}, {"edges", edges}}) << '\n';
  }
}

std::vector<SentenceGraphRecord> parse_sentence_graphs(std::istream& in, const std::string& source) {
  std::vector<SentenceGraphRecord> out;
  detail::for_each_record(in, source, [&](const json& rec, std::size_t line) {
    SentenceGraphRecord r;
    r.id = rec.at("id").get<std::string>();
    r.graph = SentenceGraph(rec.at("n").get<int>());
    for (const auto& e : rec.at("edges")) {
      try {
        r.graph.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
      } catch (const ValidationError& err) {
        throw ParseError(source, line, err.what());
      }
    }
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace cohgraph
