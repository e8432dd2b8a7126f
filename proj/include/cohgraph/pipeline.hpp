#pragma once

// Training, inductive evaluation and cross-validation.
//
// A fold builds the document-subgraph graph from its training documents
// only, trains the network on it, then scores every test document on its own:
// the document is attached to the frozen training graph, the extended graph is
// re-normalized, and the new node's row is read from an evaluation pass.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohgraph/census.hpp"
#include "cohgraph/corpus.hpp"
#include "cohgraph/gcn.hpp"
#include "cohgraph/hetgraph.hpp"

namespace cohgraph {

struct PipelineConfig {
  double delta = 0.65;
  CensusConfig census;
  TrainConfig train;
  EdgeFlags edges;
  bool baseline = false;  // identity propagation, graph unused
  int workers = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

// Everything the learner needs to know about one document.
struct DocumentSample {
  std::string id;
  int label = -1;
  SubgraphSet subgraphs;
  std::vector<double> feature;
  std::size_t length = 0;  // word count
};

// Builds sentence graphs and subgraph sets. Throws ValidationError when a
// document has no feature row.
std::vector<DocumentSample> prepare_samples(const Corpus& corpus, const EmbeddingTable& embeddings,
                                            const FeatureMatrix& features,
                                            const PipelineConfig& cfg);

// Pairs precomputed subgraph sets with labels and features.
std::vector<DocumentSample> samples_from_sets(const Corpus& corpus,
                                              const std::vector<SubgraphSetRecord>& sets,
                                              const FeatureMatrix& features);

// A trained fold: frozen vocabulary, training graph and weights.
class InductiveClassifier {
 public:
  static InductiveClassifier fit(std::span<const DocumentSample> train, int num_classes,
                                 const PipelineConfig& cfg, std::uint64_t seed);

  Eigen::RowVectorXd predict_proba(const DocumentSample& doc) const;
  // Lowest class index wins ties.
  int predict(const DocumentSample& doc) const;
  // Each document is scored independently of the others.
  std::vector<int> predict_batch(std::span<const DocumentSample> docs, int workers = 1) const;

  const GcnModel& model() const { return model_; }
  const SubgraphVocabulary& vocabulary() const { return vocab_; }
  const HeteroGraph& graph() const { return graph_; }
  const std::vector<EpochStats>& history() const { return history_; }
  bool baseline() const { return baseline_; }

 private:
  SubgraphVocabulary vocab_;
  HeteroGraph graph_;
  Eigen::MatrixXd features_;  // training node features, subgraph rows zero
  GcnModel model_;
  std::vector<EpochStats> history_;
  bool baseline_ = false;
};

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::vector<long long>> confusion;  // [gold][predicted]
};

// Per-class F1 is 0 when precision + recall = 0. Throws on empty input.
Metrics compute_metrics(std::span<const int> predicted, std::span<const int> gold, int num_classes);

struct Prediction {
  std::string id;
  int gold = -1;
  int predicted = -1;
};

struct FoldResult {
  int fold = 0;
  std::vector<Prediction> predictions;
  Metrics metrics;
  std::vector<EpochStats> history;
  GcnModel model;
};

FoldResult run_fold(std::span<const DocumentSample> train, std::span<const DocumentSample> test,
                    int num_classes, const PipelineConfig& cfg, int fold_index = 0);

// Convenience form over raw documents.
FoldResult run_fold(const std::vector<Document>& train, const std::vector<Document>& test,
                    int num_classes, const EmbeddingTable& embeddings,
                    const FeatureMatrix& features, const PipelineConfig& cfg, int fold_index = 0);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(std::span<const double> values);

struct CvReport {
  std::vector<FoldResult> folds;
  MeanStd accuracy;
  MeanStd macro_f1;
  nlohmann::json config;
};

// Fold seeds derive from cfg.train.seed and the fold index.
CvReport cross_validate(std::span<const DocumentSample> samples, const FoldPlan& plan,
                        int num_classes, const PipelineConfig& cfg);

// Newline-delimited records: config, one per fold, summary.
void write_cv_report(std::ostream& out, const CvReport& report);
void write_cv_table(std::ostream& out, const CvReport& report);
// {"fold", "id", "gold", "predicted"} per line.
void write_predictions(std::ostream& out, const CvReport& report);

}  // namespace cohgraph
