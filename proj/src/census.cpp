#include "cohgraph/census.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>

#include "cohgraph/error.hpp"
#include "jsonl.hpp"

namespace cohgraph {

using nlohmann::json;

namespace {

int hex_digits(int k) { return (k * k + 3) / 4; }

std::uint64_t bit_of(int k, int from, int to) {
  return std::uint64_t{1} << (k * k - 1 - (from * k + to));
}

void check_size(int k) {
  if (k > kMaxSubgraphSize) {
    throw UnsupportedError("subgraph size " + std::to_string(k) + " exceeds " +
                           std::to_string(kMaxSubgraphSize));
  }
  if (k < 1) throw ValidationError("subgraph size must be positive");
}

std::vector<std::pair<int, int>> forward_pairs(int k) {
  std::vector<std::pair<int, int>> pairs;
  for (int p = 0; p < k; ++p) {
    for (int q = p + 1; q < k; ++q) pairs.emplace_back(p, q);
  }
  return pairs;
}

// Signature code of every forward-edge mask on k nodes, indexed by mask.
class ForwardTable {
 public:
  explicit ForwardTable(int k) {
    const auto pairs = forward_pairs(k);
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    // bits_by_perm[p][t]: code bit contributed by pair t under permutation p.
    std::vector<std::vector<std::uint64_t>> bits_by_perm;
    do {
      std::vector<std::uint64_t> bits;
      bits.reserve(pairs.size());
      for (const auto& [a, b] : pairs) bits.push_back(bit_of(k, perm[a], perm[b]));
      bits_by_perm.push_back(std::move(bits));
    } while (std::next_permutation(perm.begin(), perm.end()));

    const std::uint32_t masks = std::uint32_t{1} << pairs.size();
    codes_.resize(masks);
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
      std::uint64_t best = ~std::uint64_t{0};
      for (const auto& bits : bits_by_perm) {
        std::uint64_t code = 0;
        for (std::size_t t = 0; t < bits.size(); ++t) {
          if (mask >> t & 1U) code |= bits[t];
        }
        best = std::min(best, code);
      }
      codes_[mask] = best;
    }
  }

  std::uint64_t code(std::uint32_t mask) const { return codes_.at(mask); }
  const std::vector<std::uint64_t>& codes() const { return codes_; }

 private:
  std::vector<std::uint64_t> codes_;
};

const ForwardTable& forward_table(int k) {
  static std::array<std::once_flag, kMaxSubgraphSize + 1> once;
  static std::array<std::unique_ptr<ForwardTable>, kMaxSubgraphSize + 1> tables;
  check_size(k);
  const auto slot = static_cast<std::size_t>(k);
  std::call_once(once[slot], [&] { tables[slot] = std::make_unique<ForwardTable>(k); });
  return *tables[slot];
}

}  // namespace

std::string Signature::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%d:%0*llx", k, hex_digits(k),
                static_cast<unsigned long long>(code));
  return buf;
}

Signature Signature::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("malformed signature \"" + text + "\"");
  Signature sig;
  try {
    std::size_t used = 0;
    sig.k = std::stoi(text.substr(0, colon), &used);
    if (used != colon) throw ValidationError("");
    const auto hex = text.substr(colon + 1);
    sig.code = std::stoull(hex, &used, 16);
    if (used != hex.size() || static_cast<int>(hex.size()) != hex_digits(sig.k)) {
      throw ValidationError("");
    }
  } catch (const std::exception&) {
    throw ValidationError("malformed signature \"" + text + "\"");
  }
  if (sig.k < 1 || sig.k > kMaxSubgraphSize) {
    throw ValidationError("malformed signature \"" + text + "\"");
  }
  return sig;
}

Signature canonical_signature(int k, const std::vector<std::pair<int, int>>& edges) {
  check_size(k);
  for (const auto& [u, v] : edges) {
    if (u < 1 || v < 1 || u > k || v > k || u == v) {
      throw ValidationError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") invalid for a " + std::to_string(k) + "-node graph");
    }
  }
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t best = ~std::uint64_t{0};
  do {
    std::uint64_t code = 0;
    for (const auto& [u, v] : edges) code |= bit_of(k, perm[u - 1], perm[v - 1]);
    best = std::min(best, code);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return Signature{k, best};
}

Signature forward_signature(int k, std::uint32_t mask) {
  return Signature{k, forward_table(k).code(mask)};
}

int count_dag_classes(int k) {
  if (k < 2) throw ValidationError("count_dag_classes needs k >= 2");
  const auto& codes = forward_table(k).codes();
  return static_cast<int>(std::set<std::uint64_t>(codes.begin(), codes.end()).size());
}

std::string to_string(CensusMode mode) {
  return mode == CensusMode::faithful ? "faithful" : "exhaustive";
}

CensusMode parse_census_mode(const std::string& text) {
  if (text == "faithful") return CensusMode::faithful;
  if (text == "exhaustive") return CensusMode::exhaustive;
  throw ValidationError("unknown census mode \"" + text + "\" (faithful|exhaustive)");
}

void CensusConfig::validate() const {
  if (k > kMaxSubgraphSize) {
    throw UnsupportedError("subgraph size " + std::to_string(k) + " exceeds " +
                           std::to_string(kMaxSubgraphSize));
  }
  if (k < 2) throw ValidationError("subgraph size k must be at least 2");
  if (w < k) throw ValidationError("window w must be at least k");
}

long long SubgraphSet::total() const {
  long long sum = 0;
  for (const auto& [sig, n] : counts) sum += n;
  return sum;
}

namespace {

class Miner {
 public:
  Miner(const SentenceGraph& graph, int k)
      : graph_(graph), k_(k), table_(forward_table(k)), chosen_(static_cast<std::size_t>(k)) {
    result_.k = k;
  }

  // Counts every k-combination of the 0-based node range [lo, hi).
  void count_window(int lo, int hi) { choose(0, lo, hi); }

  // Counts every k-subset whose smallest node is `first` and whose largest
  // node is at most `last` (0-based, inclusive).
  void count_anchored(int first, int last) {
    chosen_[0] = first;
    choose(1, first + 1, last + 1);
  }

  SubgraphSet take() { return std::move(result_); }

 private:
  void choose(int depth, int from, int hi) {
    if (depth == k_) {
      record();
      return;
    }
    for (int node = from; node <= hi - (k_ - depth); ++node) {
      chosen_[static_cast<std::size_t>(depth)] = node;
      choose(depth + 1, node + 1, hi);
    }
  }

  void record() {
    std::uint32_t mask = 0;
    int t = 0;
    for (int p = 0; p < k_; ++p) {
      for (int q = p + 1; q < k_; ++q, ++t) {
        if (graph_.has_edge(chosen_[p] + 1, chosen_[q] + 1)) mask |= std::uint32_t{1} << t;
      }
    }
    ++result_.counts[Signature{k_, table_.code(mask)}];
  }

  const SentenceGraph& graph_;
  int k_;
  const ForwardTable& table_;
  std::vector<int> chosen_;
  SubgraphSet result_;
};

}  // namespace

SubgraphSet mine_subgraphs(const SentenceGraph& graph, const CensusConfig& cfg) {
  cfg.validate();
  const int n = graph.size();
  Miner miner(graph, cfg.k);
  if (cfg.mode == CensusMode::faithful) {
    for (int i = 0; i < n - cfg.k + 1; i += cfg.w - cfg.k + 1) {
      miner.count_window(i, std::min(i + cfg.w, n));
    }
  } else {
    for (int first = 0; first + cfg.k <= n; ++first) {
      miner.count_anchored(first, std::min(first + cfg.w, n - 1));
    }
  }
  return miner.take();
}

void write_subgraph_sets(std::ostream& out, const std::vector<SubgraphSetRecord>& records) {
  for (const auto& r : records) {
    json counts = json::object();
    for (const auto& [sig, n] : r.set.counts) counts[sig.to_string()] = n;
    out << detail::dump_line(json{{"id", r.id}, {"k", r.set.k}, {"counts", counts}}) << '\n';
  }
}

std::vector<SubgraphSetRecord> parse_subgraph_sets(std::istream& in, const std::string& source) {
  std::vector<SubgraphSetRecord> out;
  detail::for_each_record(in, source, [&](const json& rec, std::size_t line) {
    SubgraphSetRecord r;
    r.id = rec.at("id").get<std::string>();
    r.set.k = rec.at("k").get<int>();
    for (const auto& [key, value] : rec.at("counts").items()) {
      Signature sig;
      try {
        sig = Signature::parse(key);
      } catch (const ValidationError& e) {
        throw ParseError(source, line, e.what());
      }
      const auto n = value.get<long long>();
      if (sig.k != r.set.k || n < 1) {
        throw ParseError(source, line, "invalid count for signature " + key);
      }
      r.set.counts[sig] = n;
    }
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace cohgraph
