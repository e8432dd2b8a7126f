#include "cohgraph/pipeline.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "cohgraph/error.hpp"
#include "support/synthetic.hpp"

namespace cohgraph {
namespace {

TEST(Metrics, HandComputedBinary) {
  const std::vector<int> pred{0, 0, 1, 1};
  const std::vector<int> gold{0, 1, 1, 1};
  const auto m = compute_metrics(pred, gold, 2);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  // F1 class 0 = 2/3, class 1 = 0.8.
  EXPECT_NEAR(m.macro_f1, (2.0 / 3.0 + 0.8) / 2.0, 1e-12);
  EXPECT_EQ(m.confusion[1][0], 1);
  EXPECT_EQ(m.confusion[1][1], 2);
}

TEST(Metrics, SingleClassPresent) {
  for (int c : {2, 3, 5}) {
    const std::vector<int> labels(6, 0);
    const auto m = compute_metrics(labels, labels, c);
    EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
    EXPECT_NEAR(m.macro_f1, (1.0 + 0.0 * (c - 1)) / c, 1e-12);
  }
}

TEST(Metrics, ConstantPredictor) {
  const std::vector<int> pred{0, 0, 0};
  const std::vector<int> gold{0, 1, 2};
  const auto m = compute_metrics(pred, gold, 3);
  EXPECT_NEAR(m.accuracy, 1.0 / 3.0, 1e-12);
  // Class 0: precision 1/3, recall 1, F1 1/2; the others 0.
  EXPECT_NEAR(m.macro_f1, 1.0 / 6.0, 1e-12);
}

TEST(Metrics, Errors) {
  const std::vector<int> empty;
  EXPECT_THROW(compute_metrics(empty, empty, 2), ValidationError);
  const std::vector<int> a{0, 1}, b{0};
  EXPECT_THROW(compute_metrics(a, b, 2), ValidationError);
  const std::vector<int> out{0, 3};
  EXPECT_THROW(compute_metrics(out, a, 2), ValidationError);
}

TEST(MeanStd, Population) {
  const std::vector<double> v{0.5, 1.0};
  const auto s = mean_std(v);
  EXPECT_DOUBLE_EQ(s.mean, 0.75);
  EXPECT_DOUBLE_EQ(s.std, 0.25);
  const std::vector<double> one{0.3};
  EXPECT_EQ(mean_std(one).std, 0.0);
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.census.k = 4;
  cfg.census.w = 4;
  cfg.train.hidden_dim = 32;
  cfg.train.epochs = 60;
  return cfg;
}

struct Fixture {
  synthetic::Dataset data;
  std::vector<DocumentSample> samples;
};

Fixture make_fixture(int documents, int feature_dim, const PipelineConfig& cfg) {
  synthetic::Options o;
  o.documents = documents;
  o.feature_dim = feature_dim;
  Fixture f{synthetic::make_dataset(o), {}};
  f.samples = prepare_samples(f.data.corpus, f.data.embeddings, f.data.features, cfg);
  return f;
}

TEST(PrepareSamples, RecoversPlannedGraphs) {
  const auto cfg = small_config();
  const auto f = make_fixture(12, 4, cfg);
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    EXPECT_EQ(f.samples[i].subgraphs, mine_subgraphs(f.data.planned[i], cfg.census));
    EXPECT_EQ(f.samples[i].label, static_cast<int>(i % 2));
  }
}

TEST(PrepareSamples, MissingFeatureRowRejected) {
  const auto cfg = small_config();
  auto f = make_fixture(4, 4, cfg);
  FeatureMatrix partial(4);
  partial.insert("doc0", {1, 2, 3, 4});
  EXPECT_THROW(prepare_samples(f.data.corpus, f.data.embeddings, partial, cfg), ValidationError);
  const std::vector<Document> train{f.data.corpus.documents[0]};
  const std::vector<Document> test{f.data.corpus.documents[1]};
  EXPECT_THROW(run_fold(train, test, 2, f.data.embeddings, partial, cfg), ValidationError);
}

TEST(InductiveClassifier, TrainingGraphIgnoresTestDocuments) {
  const auto cfg = small_config();
  const auto f = make_fixture(30, 8, cfg);
  const std::span<const DocumentSample> all(f.samples);
  const auto train = all.first(20);
  const auto clf = InductiveClassifier::fit(train, 2, cfg, 5);

  std::vector<SubgraphSet> sets;
  for (const auto& s : train) sets.push_back(s.subgraphs);
  const auto vocab = build_vocabulary(sets);
  EXPECT_EQ(clf.vocabulary().signatures, vocab.signatures);
  EXPECT_EQ(clf.graph().adjacency, build_hetero_graph(vocab, sets).adjacency);

  const auto before = clf.graph().adjacency;
  const auto first = clf.predict_proba(all[25]);
  for (std::size_t i = 20; i < 30; ++i) clf.predict_proba(all[i]);
  EXPECT_EQ(clf.graph().adjacency, before);
  EXPECT_EQ(clf.predict_proba(all[25]), first);

  // Scoring order and batching do not matter.
  const auto batch = clf.predict_batch(all.subspan(20), 3);
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(batch[i], clf.predict(all[20 + i]));
}

TEST(InductiveClassifier, EmptySubgraphSetMatchesFeatureOnlyPass) {
  const auto cfg = small_config();
  const auto f = make_fixture(20, 8, cfg);
  const auto clf = InductiveClassifier::fit(f.samples, 2, cfg, 9);
  DocumentSample lonely = f.samples[3];
  lonely.id = "lonely";
  lonely.subgraphs = SubgraphSet{4, {}};
  const auto p = clf.predict_proba(lonely);

  // Direct single-row computation through the trained weights.
  const auto& m = clf.model();
  const Eigen::RowVectorXd x = Eigen::Map<const Eigen::RowVectorXd>(lonely.feature.data(), 8);
  const Eigen::RowVectorXd h = (x * m.w1).cwiseMax(0.0);
  const Eigen::RowVectorXd logits = h * m.w2;
  const Eigen::RowVectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  EXPECT_LT((p - e / e.sum()).cwiseAbs().maxCoeff(), 1e-12);

  Rng unused(0);
  const auto base = baseline_forward(m, Eigen::MatrixXd(x), false, unused);
  EXPECT_LT((p - base.probabilities.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(InductiveClassifier, CopyOfTrainingDocumentKeepsItsClass) {
  auto cfg = small_config();
  cfg.train.hidden_dim = 64;
  cfg.train.epochs = 120;
  const auto f = make_fixture(60, 64, cfg);
  const auto clf = InductiveClassifier::fit(f.samples, 2, cfg, 3);
  for (std::size_t i = 0; i < 20; ++i) {
    DocumentSample copy = f.samples[i];
    copy.id += "-copy";
    EXPECT_EQ(clf.predict(copy), copy.label) << copy.id;
  }
}

TEST(InductiveClassifier, BaselineIgnoresStructure) {
  auto cfg = small_config();
  cfg.baseline = true;
  const auto f = make_fixture(20, 8, cfg);
  const auto clf = InductiveClassifier::fit(f.samples, 2, cfg, 1);
  EXPECT_TRUE(clf.baseline());
  DocumentSample stripped = f.samples[0];
  stripped.subgraphs = SubgraphSet{4, {}};
  EXPECT_EQ(clf.predict_proba(stripped), clf.predict_proba(f.samples[0]));
}

TEST(InductiveClassifier, RejectsBadInput) {
  const auto cfg = small_config();
  auto f = make_fixture(6, 4, cfg);
  EXPECT_THROW(InductiveClassifier::fit({}, 2, cfg, 1), ValidationError);
  f.samples[2].label = -1;
  EXPECT_THROW(InductiveClassifier::fit(f.samples, 2, cfg, 1), ValidationError);
  f.samples[2].label = 0;
  const auto clf = InductiveClassifier::fit(f.samples, 2, cfg, 1);
  DocumentSample wrong = f.samples[0];
  wrong.feature.push_back(0.0);
  EXPECT_THROW(clf.predict(wrong), ValidationError);
}

TEST(CrossValidate, SeparableFeaturesGivePerfectAccuracy) {
  auto cfg = small_config();
  auto f = make_fixture(40, 4, cfg);
  for (auto& s : f.samples) {
    for (auto& v : s.feature) v *= 0.1;
    s.feature[0] = s.label == 0 ? -3.0 : 3.0;
  }
  const auto ids = f.data.corpus.ids();
  for (bool baseline : {false, true}) {
    cfg.baseline = baseline;
    const auto report = cross_validate(f.samples, make_folds(ids, 4, 11), 2, cfg);
    EXPECT_DOUBLE_EQ(report.accuracy.mean, 1.0) << "baseline=" << baseline;
  }
}

TEST(CrossValidate, DeterministicAcrossRunsAndWorkers) {
  auto cfg = small_config();
  const auto f = make_fixture(30, 8, cfg);
  const auto plan = make_folds(f.data.corpus.ids(), 3, 2);
  const auto render = [&](int workers) {
    auto c = cfg;
    c.workers = workers;
    const auto report = cross_validate(f.samples, plan, 2, c);
    std::ostringstream out;
    write_cv_report(out, report);
    write_predictions(out, report);
    for (const auto& fold : report.folds) write_history_csv(out, fold.history);
    return out.str();
  };
  const auto once = render(1);
  EXPECT_EQ(once, render(1));
  EXPECT_EQ(once, render(3));
}

TEST(CrossValidate, ReportLayout) {
  auto cfg = small_config();
  cfg.train.epochs = 5;
  const auto f = make_fixture(12, 4, cfg);
  const auto report = cross_validate(f.samples, make_folds(f.data.corpus.ids(), 3, 1), 2, cfg);
  ASSERT_EQ(report.folds.size(), 3u);
  std::size_t predicted = 0;
  for (const auto& fold : report.folds) predicted += fold.predictions.size();
  EXPECT_EQ(predicted, 12u);

  std::ostringstream out;
  write_cv_report(out, report);
  std::istringstream in(out.str());
  std::vector<nlohmann::json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_TRUE(lines.front().contains("config"));
  EXPECT_EQ(lines.front()["config"]["k"], 4);
  EXPECT_EQ(lines.back()["type"], "summary");

  const FoldPlan bad{{Fold{{"doc0"}, {"missing"}}}, 0};
  EXPECT_THROW(cross_validate(f.samples, bad, 2, cfg), ValidationError);
}

}  // namespace
}  // namespace cohgraph
