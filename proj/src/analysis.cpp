#include "cohgraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "cohgraph/error.hpp"
#include "cohgraph/random.hpp"
#include "jsonl.hpp"

namespace cohgraph {

using nlohmann::json;

std::string to_string(CorrelationFeature f) {
  switch (f) {
    case CorrelationFeature::normalized_frequency: return "normalized";
    case CorrelationFeature::raw_count: return "count";
    case CorrelationFeature::presence: return "presence";
  }
  return "normalized";
}

CorrelationFeature parse_correlation_feature(const std::string& text) {
  if (text == "normalized") return CorrelationFeature::normalized_frequency;
  if (text == "count") return CorrelationFeature::raw_count;
  if (text == "presence") return CorrelationFeature::presence;
  throw ValidationError("unknown correlation feature \"" + text + "\" (normalized|count|presence)");
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson inputs differ in length");
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

// Centered copy and its norm; permutation tests reuse them.
struct Centered {
  std::vector<double> values;
  double norm = 0.0;
};

Centered center(std::span<const double> v) {
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  Centered c;
  c.values.reserve(v.size());
  double sq = 0.0;
  for (double e : v) {
    c.values.push_back(e - mean);
    sq += (e - mean) * (e - mean);
  }
  c.norm = std::sqrt(sq);
  return c;
}

// Relative slack so permuted statistics equal to |r| in exact arithmetic count.
constexpr double kTieSlack = 1e-12;

}  // namespace

CorrelationReport correlation_analysis(std::span<const SubgraphSet> sets,
                                       std::span<const int> labels, int num_classes,
                                       const CorrelationOptions& options) {
  if (sets.size() != labels.size()) throw ValidationError("sets and labels differ in length");
  if (num_classes < 1) throw ValidationError("class count must be positive");
  if (options.permutations < 1) throw ValidationError("permutation count must be positive");
  for (int l : labels) {
    if (l < 0 || l >= num_classes) throw ValidationError("every document needs a valid label");
  }

  std::set<Signature> all;
  for (const auto& s : sets) {
    for (const auto& [sig, n] : s.counts) all.insert(sig);
  }
  const std::vector<Signature> signatures(all.begin(), all.end());

  // feature[t][i]: value of type t in document i.
  std::vector<std::vector<double>> feature(signatures.size(), std::vector<double>(sets.size(), 0.0));
  std::vector<int> type_support(signatures.size(), 0);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double total = static_cast<double>(sets[i].total());
    for (std::size_t t = 0; t < signatures.size(); ++t) {
      const long long n = sets[i].count(signatures[t]);
      if (n == 0) continue;
      ++type_support[t];
      switch (options.feature) {
        case CorrelationFeature::normalized_frequency: feature[t][i] = n / total; break;
        case CorrelationFeature::raw_count: feature[t][i] = static_cast<double>(n); break;
        case CorrelationFeature::presence: feature[t][i] = 1.0; break;
      }
    }
  }
  std::vector<Centered> centered;
  centered.reserve(signatures.size());
  for (const auto& f : feature) centered.push_back(center(f));

  CorrelationReport report;
  Rng rng(options.seed);
  for (int c = 0; c < num_classes; ++c) {
    std::vector<double> indicator(labels.size());
    int label_support = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      indicator[i] = labels[i] == c ? 1.0 : 0.0;
      label_support += labels[i] == c;
    }
    const Centered y = center(indicator);

    struct Pending {
      std::size_t type;
      double r;
      long long extreme = 0;
    };
    std::vector<Pending> pending;
    for (std::size_t t = 0; t < signatures.size(); ++t) {
      if (centered[t].norm == 0.0) {
        report.skipped.push_back({signatures[t], c, "zero variance in subgraph feature"});
        continue;
      }
      if (y.norm == 0.0) {
        report.skipped.push_back({signatures[t], c, "zero variance in class indicator"});
        continue;
      }
      const auto r = pearson(feature[t], indicator);
      if (!r) {
        report.skipped.push_back({signatures[t], c, "zero variance"});
        continue;
      }
      pending.push_back({t, *r});
    }

    // One shared stream of label permutations per class.
    std::vector<double> shuffled = y.values;
    for (int p = 0; p < options.permutations && !pending.empty(); ++p) {
      rng.shuffle(shuffled);
      for (auto& e : pending) {
        const auto& x = centered[e.type];
        double dot = 0.0;
        for (std::size_t i = 0; i < shuffled.size(); ++i) dot += x.values[i] * shuffled[i];
        const double r_perm = dot / (x.norm * y.norm);
        if (std::abs(r_perm) >= std::abs(e.r) * (1.0 - kTieSlack)) ++e.extreme;
      }
    }

    std::vector<CorrelationEntry> entries;
    for (const auto& e : pending) {
      entries.push_back(CorrelationEntry{
          signatures[e.type], c, e.r,
          static_cast<double>(e.extreme + 1) / static_cast<double>(options.permutations + 1),
          type_support[e.type], label_support});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const CorrelationEntry& a, const CorrelationEntry& b) { return a.r > b.r; });
    report.entries.insert(report.entries.end(), entries.begin(), entries.end());
  }
  return report;
}

Diagnostics diagnostics(std::span<const Prediction> predictions,
                        std::span<const std::size_t> lengths, int num_classes,
                        std::span<const std::size_t> edges) {
  if (lengths.size() != predictions.size()) {
    throw ValidationError("lengths and predictions differ in length");
  }
  if (edges.empty() || !std::is_sorted(edges.begin(), edges.end())) {
    throw ValidationError("length bucket edges must be non-empty and ascending");
  }
  const auto c = static_cast<std::size_t>(num_classes);
  Diagnostics d;
  d.predicted_histogram.assign(c, 0);
  std::vector<long long> gold_total(c, 0), gold_correct(c, 0);

  std::size_t lower = 0;
  for (const auto upper : edges) {
    d.length_buckets.push_back(LengthBucket{lower, upper, 0, 0, std::nullopt});
    lower = upper;
  }

  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    if (p.predicted < 0 || p.predicted >= num_classes || p.gold < 0 || p.gold >= num_classes) {
      throw ValidationError("class index out of range in diagnostics input");
    }
    const bool correct = p.predicted == p.gold;
    ++d.predicted_histogram[static_cast<std::size_t>(p.predicted)];
    ++gold_total[static_cast<std::size_t>(p.gold)];
    gold_correct[static_cast<std::size_t>(p.gold)] += correct;
    for (auto& b : d.length_buckets) {
      if (lengths[i] >= b.lower && lengths[i] < b.upper) {
        ++b.total;
        b.correct += correct;
        break;
      }
    }
  }
  for (std::size_t k = 0; k < c; ++k) {
    d.class_accuracy.push_back(gold_total[k] ? std::optional<double>(static_cast<double>(gold_correct[k]) / gold_total[k])
                                             : std::nullopt);
  }
  for (auto& b : d.length_buckets) {
    if (b.total) b.accuracy = static_cast<double>(b.correct) / static_cast<double>(b.total);
  }
  return d;
}

namespace {

std::string label_name(std::span<const std::string> names, int c) {
  const auto i = static_cast<std::size_t>(c);
  return i < names.size() ? names[i] : std::to_string(c);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void write_correlations(std::ostream& out, const CorrelationReport& report,
                        std::span<const std::string> label_names) {
  for (const auto& e : report.entries) {
    out << detail::dump_line(json{{"signature", e.signature.to_string()},
                                  {"label", label_name(label_names, e.label)},
                                  {"r", e.r},
                                  {"p", e.p_value},
                                  {"type_support", e.documents_with_type},
                                  {"label_support", e.documents_with_label}})
        << '\n';
  }
  for (const auto& s : report.skipped) {
    out << detail::dump_line(json{{"signature", s.signature.to_string()},
                                  {"label", label_name(label_names, s.label)},
                                  {"skipped", s.reason}})
        << '\n';
  }
}

void write_correlation_table(std::ostream& out, const CorrelationReport& report,
                             std::span<const std::string> label_names, int top_per_class) {
  out << "label  signature        r        p      significant\n";
  int shown = 0;
  int current = -1;
  for (const auto& e : report.entries) {
    if (e.label != current) {
      current = e.label;
      shown = 0;
    }
    if (shown++ >= top_per_class) continue;
    out << std::left << std::setw(7) << label_name(label_names, e.label) << std::setw(14)
        << e.signature.to_string() << std::right << std::fixed << std::setprecision(4)
        << std::setw(9) << e.r << std::setw(9) << e.p_value << "  "
        << (e.p_value < 0.05 ? "yes" : "no") << '\n';
  }
  out << std::defaultfloat;
}

void write_diagnostics(std::ostream& out, const Diagnostics& diag,
                       std::span<const std::string> label_names) {
  json hist = json::object();
  json acc = json::object();
  for (std::size_t c = 0; c < diag.predicted_histogram.size(); ++c) {
    const auto name = label_name(label_names, static_cast<int>(c));
    hist[name] = diag.predicted_histogram[c];
    acc[name] = optional_number(diag.class_accuracy[c]);
  }
  out << detail::dump_line(json{{"type", "predicted_histogram"}, {"counts", hist}}) << '\n';
  out << detail::dump_line(json{{"type", "class_accuracy"}, {"accuracy", acc}}) << '\n';
  for (const auto& b : diag.length_buckets) {
    const bool open = b.upper == std::numeric_limits<std::size_t>::max();
    out << detail::dump_line(json{{"type", "length_bucket"},
                                  {"lower", b.lower},
                                  {"upper", open ? json(nullptr) : json(b.upper)},
                                  {"total", b.total},
                                  {"correct", b.correct},
                                  {"accuracy", optional_number(b.accuracy)}})
        << '\n';
  }
}

}  // namespace cohgraph
