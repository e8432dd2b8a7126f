#include "cohgraph/analysis.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cohgraph/error.hpp"
#include "cohgraph/random.hpp"

namespace cohgraph {
namespace {

const Signature kA = canonical_signature(3, {});
const Signature kB = canonical_signature(3, {{1, 2}});
const Signature kC = canonical_signature(3, {{1, 2}, {2, 3}});

TEST(Pearson, HandValues) {
  const std::vector<double> x{1, 2, 3}, up{1, 2, 3}, down{3, 2, 1}, flat{2, 2, 2};
  EXPECT_NEAR(*pearson(x, up), 1.0, 1e-15);
  EXPECT_NEAR(*pearson(x, down), -1.0, 1e-15);
  EXPECT_FALSE(pearson(x, flat).has_value());
  const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  EXPECT_NEAR(*pearson(a, b), 0.8, 1e-12);
  EXPECT_THROW(pearson(a, x), ValidationError);
}

// Exact two-sided permutation p-value by enumerating every distinct
// arrangement of the labels.
double exact_p_value(const std::vector<double>& x, std::vector<double> y) {
  const double r = std::abs(*pearson(x, y));
  std::sort(y.begin(), y.end());
  long long total = 0, extreme = 0;
  do {
    ++total;
    const auto rp = pearson(x, y);
    if (rp && std::abs(*rp) >= r - 1e-12) ++extreme;
  } while (std::next_permutation(y.begin(), y.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

TEST(CorrelationAnalysis, PerfectSplitMatchesExactPermutationTest) {
  const std::vector<SubgraphSet> sets{{3, {{kA, 2}}}, {3, {{kA, 1}}}, {3, {{kB, 4}}}, {3, {{kB, 1}}}};
  const std::vector<int> labels{0, 0, 1, 1};
  CorrelationOptions opt;
  opt.permutations = 20000;
  const auto report = correlation_analysis(sets, labels, 2, opt);
  ASSERT_EQ(report.entries.size(), 4u);
  EXPECT_TRUE(report.skipped.empty());
  const double exact = exact_p_value({0, 0, 1, 1}, {0, 0, 1, 1});
  EXPECT_NEAR(exact, 1.0 / 3.0, 1e-15);
  for (const auto& e : report.entries) {
    EXPECT_NEAR(std::abs(e.r), 1.0, 1e-12);
    EXPECT_NEAR(e.p_value, exact, 0.015);
    EXPECT_EQ(e.documents_with_type, 2);
    EXPECT_EQ(e.documents_with_label, 2);
  }
  // Class 1 correlates positively with B.
  EXPECT_EQ(report.entries[2].label, 1);
  EXPECT_EQ(report.entries[2].signature, kB);
  EXPECT_GT(report.entries[2].r, 0.0);
}

TEST(CorrelationAnalysis, RandomInstancesMatchExactPermutationTest) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<SubgraphSet> sets;
    std::vector<int> labels;
    for (int i = 0; i < 7; ++i) {
      SubgraphSet s{3, {{kA, 1 + static_cast<long long>(rng.below(4))}}};
      if (rng.bernoulli(0.5)) s.counts[kB] = 1 + static_cast<long long>(rng.below(4));
      sets.push_back(s);
      labels.push_back(i < 3 ? 1 : 0);
    }
    CorrelationOptions opt;
    opt.permutations = 20000;
    opt.seed = 100 + static_cast<std::uint64_t>(trial);
    const auto report = correlation_analysis(sets, labels, 2, opt);
    for (const auto& e : report.entries) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < sets.size(); ++i) {
        x.push_back(static_cast<double>(sets[i].count(e.signature)) / static_cast<double>(sets[i].total()));
        y.push_back(labels[i] == e.label ? 1.0 : 0.0);
      }
      EXPECT_NEAR(e.r, *pearson(x, y), 1e-12);
      EXPECT_NEAR(e.p_value, exact_p_value(x, y), 0.02);
    }
  }
}

TEST(CorrelationAnalysis, PValueBoundsOrderingAndReproducibility) {
  Rng rng(6);
  std::vector<SubgraphSet> sets;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    SubgraphSet s{3, {}};
    for (const auto& sig : {kA, kB, kC}) {
      if (rng.bernoulli(0.6)) s.counts[sig] = 1 + static_cast<long long>(rng.below(5));
    }
    if (s.counts.empty()) s.counts[kA] = 1;
    sets.push_back(s);
    labels.push_back(static_cast<int>(rng.below(3)));
  }
  CorrelationOptions opt;
  opt.permutations = 500;
  const auto a = correlation_analysis(sets, labels, 3, opt);
  const auto b = correlation_analysis(sets, labels, 3, opt);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& e = a.entries[i];
    EXPECT_GE(e.p_value, 1.0 / 501.0);
    EXPECT_LE(e.p_value, 1.0);
    EXPECT_GE(e.r, -1.0);
    EXPECT_LE(e.r, 1.0);
    EXPECT_EQ(e.p_value, b.entries[i].p_value);
    if (i > 0 && a.entries[i - 1].label == e.label) EXPECT_GE(a.entries[i - 1].r, e.r);
    if (i > 0) EXPECT_LE(a.entries[i - 1].label, e.label);
  }
}

TEST(CorrelationAnalysis, FeatureVariants) {
  const std::vector<SubgraphSet> sets{{3, {{kA, 1}, {kB, 1}}}, {3, {{kA, 3}, {kB, 1}}}, {3, {{kA, 2}}}};
  const std::vector<int> labels{0, 1, 1};
  for (auto feature : {CorrelationFeature::normalized_frequency, CorrelationFeature::raw_count,
                       CorrelationFeature::presence}) {
    CorrelationOptions opt;
    opt.feature = feature;
    opt.permutations = 50;
    const auto report = correlation_analysis(sets, labels, 2, opt);
    for (const auto& e : report.entries) {
      if (e.signature != kA || e.label != 1) continue;
      std::vector<double> x;
      switch (feature) {
        case CorrelationFeature::normalized_frequency: x = {0.5, 0.75, 1.0}; break;
        case CorrelationFeature::raw_count: x = {1, 3, 2}; break;
        case CorrelationFeature::presence: x = {1, 1, 1}; break;
      }
      EXPECT_NEAR(e.r, *pearson(x, std::vector<double>{0, 1, 1}), 1e-12);
    }
    if (feature == CorrelationFeature::presence) {
      // Type A occurs everywhere: zero variance, reported as skipped.
      EXPECT_TRUE(std::any_of(report.skipped.begin(), report.skipped.end(),
                              [](const SkippedPair& s) { return s.signature == kA; }));
    }
  }
  EXPECT_EQ(parse_correlation_feature("count"), CorrelationFeature::raw_count);
  EXPECT_EQ(to_string(CorrelationFeature::presence), "presence");
  EXPECT_THROW(parse_correlation_feature("tfidf"), ValidationError);
}

TEST(CorrelationAnalysis, AbsentClassIsSkipped) {
  const std::vector<SubgraphSet> sets{{3, {{kA, 1}}}, {3, {{kB, 1}}}};
  const std::vector<int> labels{0, 0};
  const auto report = correlation_analysis(sets, labels, 2, CorrelationOptions{});
  EXPECT_TRUE(report.entries.empty());
  EXPECT_EQ(report.skipped.size(), 4u);
  const std::vector<int> bad{0, 2};
  EXPECT_THROW(correlation_analysis(sets, bad, 2, CorrelationOptions{}), ValidationError);
}

TEST(Diagnostics, HistogramAccuracyAndBuckets) {
  const std::vector<Prediction> preds{{"a", 0, 0}, {"b", 0, 1}, {"c", 1, 1}, {"d", 1, 1}, {"e", 0, 0}};
  const std::vector<std::size_t> lengths{50, 150, 99, 100, 450};
  const auto d = diagnostics(preds, lengths, 3);
  EXPECT_EQ(d.predicted_histogram, (std::vector<long long>{2, 3, 0}));
  EXPECT_NEAR(*d.class_accuracy[0], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(*d.class_accuracy[1], 1.0);
  EXPECT_FALSE(d.class_accuracy[2].has_value());
  ASSERT_EQ(d.length_buckets.size(), 5u);
  EXPECT_EQ(d.length_buckets[0].total, 2);  // 50, 99
  EXPECT_EQ(d.length_buckets[1].total, 2);  // 150, 100
  EXPECT_EQ(*d.length_buckets[1].accuracy, 0.5);
  EXPECT_EQ(d.length_buckets[2].total, 0);
  EXPECT_FALSE(d.length_buckets[2].accuracy.has_value());
  EXPECT_EQ(d.length_buckets[4].total, 1);

  std::ostringstream out;
  const std::vector<std::string> names{"low", "mid", "high"};
  write_diagnostics(out, d, names);
  EXPECT_NE(out.str().find("\"high\":null"), std::string::npos);

  const std::vector<std::size_t> unsorted{5, 3};
  EXPECT_THROW(diagnostics(preds, lengths, 3, unsorted), ValidationError);
}

TEST(CorrelationOutput, TableShowsTopTwoPerClass) {
  CorrelationReport report;
  for (int label = 0; label < 2; ++label) {
    report.entries.push_back({kA, label, 0.9, 0.01, 3, 3});
    report.entries.push_back({kB, label, 0.5, 0.2, 3, 3});
    report.entries.push_back({kC, label, 0.1, 0.8, 3, 3});
  }
  std::ostringstream out;
  const std::vector<std::string> names{"x", "y"};
  write_correlation_table(out, report, names);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(text.find(kC.to_string()), std::string::npos);
}

}  // namespace
}  // namespace cohgraph
