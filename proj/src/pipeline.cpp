#include "cohgraph/pipeline.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <unordered_map>

#include "cohgraph/error.hpp"
#include "cohgraph/sentgraph.hpp"
#include "jsonl.hpp"
#include "parallel.hpp"

namespace cohgraph {

using nlohmann::json;

void PipelineConfig::validate() const {
  static_cast<void>(SimilarityThreshold{delta});
  census.validate();
  train.validate();
  if (workers < 1) throw ValidationError("worker count must be positive");
}

json PipelineConfig::to_json() const {
  return json{{"delta", delta},
              {"k", census.k},
              {"w", census.w},
              {"census_mode", to_string(census.mode)},
              {"hidden_dim", train.hidden_dim},
              {"dropout", train.dropout_rate},
              {"learning_rate", train.learning_rate},
              {"epochs", train.epochs},
              {"seed", train.seed},
              {"adam_beta1", train.beta1},
              {"adam_beta2", train.beta2},
              {"adam_epsilon", train.epsilon},
              {"bias", train.use_bias},
              {"doc_subgraph_edges", edges.doc_subgraph},
              {"subgraph_subgraph_edges", edges.subgraph_subgraph},
              {"baseline", baseline}};
}

std::vector<DocumentSample> prepare_samples(const Corpus& corpus, const EmbeddingTable& embeddings,
                                            const FeatureMatrix& features,
                                            const PipelineConfig& cfg) {
  cfg.validate();
  const auto ids = corpus.ids();
  features.require_rows(ids);
  const SimilarityThreshold threshold{cfg.delta};
  std::vector<DocumentSample> samples(corpus.documents.size());
  detail::parallel_for(samples.size(), cfg.workers, [&](std::size_t i) {
    const Document& doc = corpus.documents[i];
    DocumentSample& s = samples[i];
    s.id = doc.id;
    s.label = doc.label.value_or(-1);
    s.subgraphs = mine_subgraphs(build_sentence_graph(doc, embeddings, threshold), cfg.census);
    s.feature = *features.find(doc.id);
    s.length = doc.word_count();
  });
  return samples;
}

std::vector<DocumentSample> samples_from_sets(const Corpus& corpus,
                                              const std::vector<SubgraphSetRecord>& sets,
                                              const FeatureMatrix& features) {
  std::unordered_map<std::string, const SubgraphSet*> by_id;
  for (const auto& r : sets) by_id[r.id] = &r.set;
  features.require_rows(corpus.ids());
  std::vector<DocumentSample> samples;
  samples.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    const auto it = by_id.find(doc.id);
    if (it == by_id.end()) {
      throw ValidationError("no subgraph set for document \"" + doc.id + "\"");
    }
    samples.push_back(DocumentSample{doc.id, doc.label.value_or(-1), *it->second,
                                     *features.find(doc.id), doc.word_count()});
  }
  return samples;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::RowVectorXd feature_row(const DocumentSample& doc, Eigen::Index dim) {
  if (static_cast<Eigen::Index>(doc.feature.size()) != dim) {
    throw ValidationError("feature row of \"" + doc.id + "\" has dimension " +
                          std::to_string(doc.feature.size()) + ", expected " + std::to_string(dim));
  }
  return Eigen::Map<const Eigen::RowVectorXd>(doc.feature.data(), dim);
}

}  // namespace

InductiveClassifier InductiveClassifier::fit(std::span<const DocumentSample> train,
                                             int num_classes, const PipelineConfig& cfg,
                                             std::uint64_t seed) {
  cfg.validate();
  if (train.empty()) throw ValidationError("no training documents");
  if (num_classes < 1) throw ValidationError("class count must be positive");
  const auto dim = static_cast<Eigen::Index>(train.front().feature.size());
  if (dim == 0) throw ValidationError("document features are empty");

  InductiveClassifier clf;
  clf.baseline_ = cfg.baseline;

  std::vector<SubgraphSet> sets;
  sets.reserve(train.size());
  Supervision sup;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& doc = train[i];
    if (doc.label < 0 || doc.label >= num_classes) {
      throw ValidationError("training document \"" + doc.id + "\" has no valid label");
    }
    sets.push_back(doc.subgraphs);
    sup.rows.push_back(static_cast<Eigen::Index>(i));
    sup.labels.push_back(doc.label);
  }
  clf.vocab_ = build_vocabulary(sets);
  clf.graph_ = build_hetero_graph(clf.vocab_, sets, cfg.edges);

  const Eigen::Index n = clf.graph_.num_documents;
  const Eigen::Index rows = cfg.baseline ? n : clf.graph_.order();
  clf.features_ = Eigen::MatrixXd::Zero(rows, dim);
  for (Eigen::Index i = 0; i < n; ++i) clf.features_.row(i) = feature_row(train[i], dim);

  Rng rng(seed);
  clf.model_ = GcnModel::initialize(dim, cfg.train.hidden_dim, num_classes, cfg.train.dropout_rate,
                                    cfg.train.use_bias, rng);
  if (cfg.baseline) {
    clf.history_ = cohgraph::train(clf.model_, nullptr, clf.features_, sup, cfg.train, rng);
  } else {
    const PropagationMatrix prop = normalize(clf.graph_);
    clf.history_ = cohgraph::train(clf.model_, &prop, clf.features_, sup, cfg.train, rng);
  }
  return clf;
}

Eigen::RowVectorXd InductiveClassifier::predict_proba(const DocumentSample& doc) const {
  const Eigen::Index dim = model_.input_dim();
  const Eigen::RowVectorXd x = feature_row(doc, dim);
  if (baseline_) {
    Rng unused(0);
    return baseline_forward(model_, Eigen::MatrixXd(x), false, unused).probabilities.row(0);
  }
  const HeteroGraph extended = attach_document(graph_, vocab_, doc.subgraphs);
  const PropagationMatrix prop = normalize(extended);
  const Eigen::Index n = graph_.num_documents;
  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(extended.order(), dim);
  features.topRows(n) = features_.topRows(n);
  features.row(n) = x;
  // Subgraph rows after the new document stay zero.
  const ForwardPass pass = forward_with_masks(model_, prop, features, DropoutMasks{});
  return pass.probabilities.row(n);
}

int InductiveClassifier::predict(const DocumentSample& doc) const {
  const Eigen::MatrixXd p = predict_proba(doc);
  return argmax_row(p, 0);
}

std::vector<int> InductiveClassifier::predict_batch(std::span<const DocumentSample> docs,
                                                    int workers) const {
  std::vector<int> out(docs.size(), -1);
  detail::parallel_for(docs.size(), workers, [&](std::size_t i) { out[i] = predict(docs[i]); });
  return out;
}

// ---------------------------------------------------------------------------

Metrics compute_metrics(std::span<const int> predicted, std::span<const int> gold,
                        int num_classes) {
  if (predicted.empty()) throw ValidationError("metrics of an empty prediction set");
  if (predicted.size() != gold.size()) throw ValidationError("prediction and gold lengths differ");
  if (num_classes < 1) throw ValidationError("class count must be positive");
  const auto c = static_cast<std::size_t>(num_classes);
  Metrics m;
  m.confusion.assign(c, std::vector<long long>(c, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes) {
      throw ValidationError("class index out of range in metrics input");
    }
    ++m.confusion[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(predicted[i])];
  }
  long long correct = 0;
  double f1_sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    long long tp = m.confusion[k][k];
    long long gold_k = 0, pred_k = 0;
    for (std::size_t j = 0; j < c; ++j) {
      gold_k += m.confusion[k][j];
      pred_k += m.confusion[j][k];
    }
    correct += tp;
    const double precision = pred_k ? static_cast<double>(tp) / pred_k : 0.0;
    const double recall = gold_k ? static_cast<double>(tp) / gold_k : 0.0;
    if (precision + recall > 0.0) f1_sum += 2.0 * precision * recall / (precision + recall);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
  m.macro_f1 = f1_sum / static_cast<double>(num_classes);
  return m;
}

FoldResult run_fold(std::span<const DocumentSample> train, std::span<const DocumentSample> test,
                    int num_classes, const PipelineConfig& cfg, int fold_index) {
  if (test.empty()) throw ValidationError("fold has no test documents");
  for (const auto& d : test) {
    if (d.label < 0 || d.label >= num_classes) {
      throw ValidationError("test document \"" + d.id + "\" has no valid label");
    }
  }
  const auto clf = InductiveClassifier::fit(
      train, num_classes, cfg, Rng::derive(cfg.train.seed, static_cast<std::uint64_t>(fold_index)));
  const auto predicted = clf.predict_batch(test, cfg.workers);

  FoldResult result;
  result.fold = fold_index;
  std::vector<int> gold;
  for (std::size_t i = 0; i < test.size(); ++i) {
    result.predictions.push_back({test[i].id, test[i].label, predicted[i]});
    gold.push_back(test[i].label);
  }
  result.metrics = compute_metrics(predicted, gold, num_classes);
  result.history = clf.history();
  result.model = clf.model();
  return result;
}

FoldResult run_fold(const std::vector<Document>& train, const std::vector<Document>& test,
                    int num_classes, const EmbeddingTable& embeddings,
                    const FeatureMatrix& features, const PipelineConfig& cfg, int fold_index) {
  Corpus train_corpus{train, {}};
  Corpus test_corpus{test, {}};
  features.require_rows(train_corpus.ids());
  features.require_rows(test_corpus.ids());
  const auto train_samples = prepare_samples(train_corpus, embeddings, features, cfg);
  const auto test_samples = prepare_samples(test_corpus, embeddings, features, cfg);
  return run_fold(train_samples, test_samples, num_classes, cfg, fold_index);
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

CvReport cross_validate(std::span<const DocumentSample> samples, const FoldPlan& plan,
                        int num_classes, const PipelineConfig& cfg) {
  cfg.validate();
  if (plan.folds.empty()) throw ValidationError("fold plan is empty");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < samples.size(); ++i) index[samples[i].id] = i;
  auto gather = [&](const std::vector<std::string>& ids) {
    std::vector<DocumentSample> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      const auto it = index.find(id);
      if (it == index.end()) throw ValidationError("fold references unknown document \"" + id + "\"");
      out.push_back(samples[it->second]);
    }
    return out;
  };

  CvReport report;
  report.config = cfg.to_json();
  report.config["folds"] = plan.folds.size();
  report.config["num_classes"] = num_classes;
  report.folds.resize(plan.folds.size());

  // Folds share the worker budget; each fold scores its test set serially.
  PipelineConfig fold_cfg = cfg;
  fold_cfg.workers = 1;
  detail::parallel_for(plan.folds.size(), cfg.workers, [&](std::size_t f) {
    const auto train = gather(plan.folds[f].train);
    const auto test = gather(plan.folds[f].test);
    report.folds[f] = run_fold(train, test, num_classes, fold_cfg, static_cast<int>(f));
  });

  std::vector<double> acc, f1;
  for (const auto& r : report.folds) {
    acc.push_back(r.metrics.accuracy);
    f1.push_back(r.metrics.macro_f1);
  }
  report.accuracy = mean_std(acc);
  report.macro_f1 = mean_std(f1);
  return report;
}

void write_cv_report(std::ostream& out, const CvReport& report) {
  out << detail::dump_line(json{{"type", "config"}, {"config", report.config}}) << '\n';
  for (const auto& r : report.folds) {
    out << detail::dump_line(json{{"type", "fold"},
                                  {"fold", r.fold},
                                  {"test_size", r.predictions.size()},
                                  {"accuracy", r.metrics.accuracy},
                                  {"macro_f1", r.metrics.macro_f1},
                                  {"confusion", r.metrics.confusion}})
        << '\n';
  }
  out << detail::dump_line(json{{"type", "summary"},
                                {"accuracy_mean", report.accuracy.mean},
                                {"accuracy_std", report.accuracy.std},
                                {"macro_f1_mean", report.macro_f1.mean},
                                {"macro_f1_std", report.macro_f1.std}})
      << '\n';
}

void write_cv_table(std::ostream& out, const CvReport& report) {
  const bool baseline = report.config.value("baseline", false);
  out << (baseline ? "model: baseline (identity propagation)\n" : "model: gcn\n");
  out << std::fixed << std::setprecision(2);
  out << "fold  test  accuracy(%)  macro-F1(%)\n";
  for (const auto& r : report.folds) {
    out << std::setw(4) << r.fold << std::setw(6) << r.predictions.size() << std::setw(13)
        << 100.0 * r.metrics.accuracy << std::setw(13) << 100.0 * r.metrics.macro_f1 << '\n';
  }
  out << "mean accuracy " << 100.0 * report.accuracy.mean << " (" << 100.0 * report.accuracy.std
      << ")  macro-F1 " << 100.0 * report.macro_f1.mean << " (" << 100.0 * report.macro_f1.std
      << ")\n";
  out << std::defaultfloat;
}

void write_predictions(std::ostream& out, const CvReport& report) {
  for (const auto& r : report.folds) {
    for (const auto& p : r.predictions) {
      out << detail::dump_line(
                 json{{"fold", r.fold}, {"id", p.id}, {"gold", p.gold}, {"predicted", p.predicted}})
          << '\n';
    }
  }
}

}  // namespace cohgraph
