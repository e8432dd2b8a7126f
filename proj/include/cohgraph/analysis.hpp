#pragma once

// Post-hoc analyses: which subgraph types track which class, and where the
// classifier's predictions fall.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cohgraph/census.hpp"
#include "cohgraph/pipeline.hpp"

namespace cohgraph {

// Per-document value of a subgraph type fed to the correlation.
enum class CorrelationFeature {
  normalized_frequency,  // count / total count of the document's set
  raw_count,
  presence,  // 1 if the type occurs, else 0
};

std::string to_string(CorrelationFeature f);
CorrelationFeature parse_correlation_feature(const std::string& text);

struct CorrelationOptions {
  CorrelationFeature feature = CorrelationFeature::normalized_frequency;
  int permutations = 10000;
  std::uint64_t seed = 42;
};

struct CorrelationEntry {
  Signature signature;
  int label = 0;
  double r = 0.0;
  double p_value = 1.0;
  int documents_with_type = 0;   // support of the subgraph type
  int documents_with_label = 0;  // support of the class
};

struct SkippedPair {
  Signature signature;
  int label = 0;
  std::string reason;
};

struct CorrelationReport {
  std::vector<CorrelationEntry> entries;  // grouped by label, r descending
  std::vector<SkippedPair> skipped;
};

// Pearson r; empty when either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// For every (subgraph type, class) pair: Pearson r between the per-document
// feature and the class indicator, with a two-sided permutation p-value
// (1 + #{|r_perm| >= |r|}) / (1 + permutations).
CorrelationReport correlation_analysis(std::span<const SubgraphSet> sets,
                                       std::span<const int> labels, int num_classes,
                                       const CorrelationOptions& options = {});

struct LengthBucket {
  std::size_t lower = 0;
  std::size_t upper = 0;  // exclusive; max() for the open bucket
  long long total = 0;
  long long correct = 0;
  std::optional<double> accuracy;
};

struct Diagnostics {
  std::vector<long long> predicted_histogram;          // per class
  std::vector<std::optional<double>> class_accuracy;   // recall per gold class
  std::vector<LengthBucket> length_buckets;
};

inline const std::vector<std::size_t> kDefaultLengthEdges{100, 200, 300, 400,
                                                          std::numeric_limits<std::size_t>::max()};

// `lengths[i]` is the word count of `predictions[i]`'s document. Bucket b
// covers [edges[b-1], edges[b]) with an implicit leading edge of 0.
Diagnostics diagnostics(std::span<const Prediction> predictions,
                        std::span<const std::size_t> lengths, int num_classes,
                        std::span<const std::size_t> edges = kDefaultLengthEdges);

void write_correlations(std::ostream& out, const CorrelationReport& report,
                        std::span<const std::string> label_names);
void write_correlation_table(std::ostream& out, const CorrelationReport& report,
                             std::span<const std::string> label_names, int top_per_class = 2);
void write_diagnostics(std::ostream& out, const Diagnostics& diag,
                       std::span<const std::string> label_names);

}  // namespace cohgraph
