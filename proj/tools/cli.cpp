#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <CLI11.hpp>

#include "cohgraph/error.hpp"

namespace cohgraph::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json RunConfig::to_json() const {
  json j = pipeline.to_json();
  j["corpus"] = corpus.string();
  j["embeddings"] = embeddings.string();
  j["features"] = features.string();
  j["graphs"] = graphs.string();
  j["census"] = census.string();
  j["output_dir"] = output_dir.string();
  j["labels"] = labels;
  j["folds"] = folds;
  j["stratified"] = stratified;
  j["correlation_feature"] = to_string(correlation_feature);
  j["permutations"] = permutations;
  json edges = json::array();
  for (auto e : length_edges) {
    edges.push_back(e == std::numeric_limits<std::size_t>::max() ? json(nullptr) : json(e));
  }
  j["length_edges"] = edges;
  return j;
}

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

fs::path graphs_path(const RunConfig& cfg) {
  return cfg.graphs.empty() ? cfg.output_dir / "graphs.jsonl" : cfg.graphs;
}

fs::path census_path(const RunConfig& cfg) {
  return cfg.census.empty() ? cfg.output_dir / "census.jsonl" : cfg.census;
}

void require_path(const fs::path& p, const std::string& flag) {
  if (p.empty()) throw UsageError(flag + " is required");
  if (!fs::exists(p)) throw UsageError(flag + ": no such file " + p.string());
}

std::ofstream open_output(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

std::string header_line(const RunConfig& cfg) {
  return json{{"config", cfg.to_json()}}.dump() + "\n";
}

Corpus read_corpus(const RunConfig& cfg) {
  require_path(cfg.corpus, "--corpus");
  return load_corpus(cfg.corpus, LabelScheme{cfg.labels});
}

void validate(const RunConfig& cfg) {
  try {
    cfg.pipeline.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  } catch (const UnsupportedError& e) {
    throw UsageError(e.what());
  }
  if (cfg.folds < 2) throw UsageError("--folds must be at least 2");
  if (cfg.permutations < 1) throw UsageError("--permutations must be positive");
}

// Settings a subgraph-set cache depends on.
json census_settings(const json& config) {
  json out = json::object();
  for (const auto* key : {"delta", "k", "w", "census_mode"}) {
    if (config.contains(key)) out[key] = config[key];
  }
  return out;
}

std::vector<SubgraphSetRecord> read_census(const RunConfig& cfg) {
  const auto path = census_path(cfg);
  require_path(path, "--census");
  auto in = open_input(path);
  std::string first;
  std::getline(in, first);
  const json header = json::parse(first, nullptr, false);
  if (!header.is_discarded() && header.contains("config")) {
    const json cached = census_settings(header["config"]);
    const json wanted = census_settings(cfg.to_json());
    for (const auto& [key, value] : cached.items()) {
      // The census command does not see delta; graphs carry it instead.
      if (key == "delta") continue;
      if (wanted.contains(key) && wanted[key] != value) {
        throw ValidationError(path.string() + ": cache was built with " + key + "=" + value.dump() +
                              ", config has " + key + "=" + wanted[key].dump());
      }
    }
  }
  in.clear();
  in.seekg(0);
  auto records = parse_subgraph_sets(in, path.string());
  for (const auto& r : records) {
    if (!r.set.empty() && r.set.k != cfg.pipeline.census.k) {
      throw ValidationError(path.string() + ": cache was built with k=" + std::to_string(r.set.k) +
                            ", config has k=" + std::to_string(cfg.pipeline.census.k));
    }
  }
  return records;
}

}  // namespace

void cmd_graphs(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Corpus corpus = read_corpus(cfg);
  require_path(cfg.embeddings, "--embeddings");
  const EmbeddingTable table = load_embeddings(cfg.embeddings);
  const SimilarityThreshold threshold{cfg.pipeline.delta};

  std::vector<SentenceGraphRecord> records;
  records.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    records.push_back({doc.id, build_sentence_graph(doc, table, threshold)});
  }
  const auto path = graphs_path(cfg);
  auto out = open_output(path);
  out << header_line(cfg);
  write_sentence_graphs(out, records);
  log << "wrote " << records.size() << " sentence graphs to " << path.string() << '\n';
}

void cmd_census(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto in_path = graphs_path(cfg);
  require_path(in_path, "--graphs");
  auto in = open_input(in_path);
  const auto graphs = parse_sentence_graphs(in, in_path.string());

  std::vector<SubgraphSetRecord> records;
  records.reserve(graphs.size());
  for (const auto& g : graphs) records.push_back({g.id, mine_subgraphs(g.graph, cfg.pipeline.census)});
  const auto path = census_path(cfg);
  auto out = open_output(path);
  out << header_line(cfg);
  write_subgraph_sets(out, records);
  log << "wrote " << records.size() << " subgraph sets to " << path.string() << '\n';
}

CvReport cmd_train_eval(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Corpus corpus = read_corpus(cfg);
  require_labels(corpus);
  require_path(cfg.features, "--features");
  const FeatureMatrix features = load_features(cfg.features);

  // Missing caches are built and kept for later runs.
  if (!fs::exists(census_path(cfg))) {
    if (!fs::exists(graphs_path(cfg))) cmd_graphs(cfg, log);
    cmd_census(cfg, log);
  }
  const std::vector<DocumentSample> samples = samples_from_sets(corpus, read_census(cfg), features);

  const auto ids = corpus.ids();
  FoldPlan plan;
  try {
    if (cfg.stratified) {
      std::vector<int> labels;
      for (const auto& d : corpus.documents) labels.push_back(*d.label);
      plan = make_stratified_folds(ids, labels, cfg.folds, cfg.pipeline.train.seed);
    } else {
      plan = make_folds(ids, cfg.folds, cfg.pipeline.train.seed);
    }
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }

  CvReport report = cross_validate(samples, plan, corpus.num_classes(), cfg.pipeline);
  report.config = cfg.to_json();
  report.config["num_classes"] = corpus.num_classes();
  report.config["label_names"] = corpus.label_names;

  const auto& dir = cfg.output_dir;
  {
    auto out = open_output(dir / "report.jsonl");
    write_cv_report(out, report);
  }
  {
    auto out = open_output(dir / "report.txt");
    out << "# " << header_line(cfg);
    write_cv_table(out, report);
  }
  {
    auto out = open_output(dir / "predictions.jsonl");
    out << header_line(cfg);
    write_predictions(out, report);
  }
  {
    auto out = open_output(dir / "folds.jsonl");
    out << header_line(cfg);
    write_fold_plan(out, plan);
  }
  for (const auto& f : report.folds) {
    auto out = open_output(dir / ("history_fold" + std::to_string(f.fold) + ".csv"));
    out << "# " << header_line(cfg);
    write_history_csv(out, f.history);
    if (cfg.save_models) {
      auto model_out = open_output(dir / ("model_fold" + std::to_string(f.fold) + ".jsonl"));
      model_out << header_line(cfg);
      write_checkpoint(model_out, f.model);
    }
  }
  write_cv_table(log, report);
  return report;
}

void cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Corpus corpus = read_corpus(cfg);
  require_labels(corpus);
  const auto records = read_census(cfg);
  std::unordered_map<std::string, const SubgraphSet*> by_id;
  for (const auto& r : records) by_id[r.id] = &r.set;

  std::vector<SubgraphSet> sets;
  std::vector<int> labels;
  for (const auto& d : corpus.documents) {
    const auto it = by_id.find(d.id);
    if (it == by_id.end()) throw ValidationError("no subgraph set for document \"" + d.id + "\"");
    sets.push_back(*it->second);
    labels.push_back(*d.label);
  }
  const CorrelationOptions options{cfg.correlation_feature, cfg.permutations,
                                   cfg.pipeline.train.seed};
  const auto correlations = correlation_analysis(sets, labels, corpus.num_classes(), options);
  {
    auto out = open_output(cfg.output_dir / "correlations.jsonl");
    out << header_line(cfg);
    write_correlations(out, correlations, corpus.label_names);
  }
  {
    auto out = open_output(cfg.output_dir / "correlations.txt");
    out << "# " << header_line(cfg);
    write_correlation_table(out, correlations, corpus.label_names);
  }
  write_correlation_table(log, correlations, corpus.label_names);

  const fs::path pred_path =
      cfg.predictions.empty() ? cfg.output_dir / "predictions.jsonl" : cfg.predictions;
  if (!fs::exists(pred_path)) {
    log << "no predictions at " << pred_path.string() << "; skipping diagnostics\n";
    return;
  }
  std::vector<Prediction> predictions;
  std::vector<std::size_t> lengths;
  auto in = open_input(pred_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw ParseError(pred_path.string(), line_no, "malformed JSON");
    if (rec.contains("config")) continue;
    Prediction p{rec.at("id").get<std::string>(), rec.at("gold").get<int>(),
                 rec.at("predicted").get<int>()};
    const Document* doc = corpus.find(p.id);
    if (!doc) throw ParseError(pred_path.string(), line_no, "unknown document \"" + p.id + "\"");
    lengths.push_back(doc->word_count());
    predictions.push_back(std::move(p));
  }
  const auto diag = diagnostics(predictions, lengths, corpus.num_classes(), cfg.length_edges);
  auto out = open_output(cfg.output_dir / "diagnostics.jsonl");
  out << header_line(cfg);
  write_diagnostics(out, diag, corpus.label_names);
  log << "wrote diagnostics for " << predictions.size() << " predictions\n";
}

namespace {

void add_common(CLI::App* app, RunConfig& cfg, int& workers) {
  app->add_option("--out-dir", cfg.output_dir, "Output directory");
  app->add_option("--workers", workers, "Worker threads (default: available cores)");
}

void add_graph_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--corpus", cfg.corpus, "Corpus file (JSON lines)");
  app->add_option("--embeddings", cfg.embeddings, "Word embedding text file");
  app->add_option("--delta", cfg.pipeline.delta, "Noun similarity threshold")->capture_default_str();
  app->add_option("--labels", cfg.labels, "Label names in class order")->delimiter(',');
}

void add_census_options(CLI::App* app, RunConfig& cfg, std::string& mode) {
  app->add_option("--graphs", cfg.graphs, "Sentence-graph cache");
  app->add_option("--census", cfg.census, "Subgraph-set cache");
  app->add_option("-k,--subgraph-size", cfg.pipeline.census.k, "Nodes per subgraph")
      ->capture_default_str();
  app->add_option("-w,--window", cfg.pipeline.census.w, "Maximum sentence distance")
      ->capture_default_str();
  app->add_option("--census-mode", mode, "faithful | exhaustive")->capture_default_str();
}

void add_train_options(CLI::App* app, RunConfig& cfg, bool& no_eds, bool& no_ess) {
  auto& t = cfg.pipeline.train;
  app->add_option("--features", cfg.features, "Document feature file (JSON lines)");
  app->add_option("--hidden", t.hidden_dim, "Hidden layer width")->capture_default_str();
  app->add_option("--dropout", t.dropout_rate, "Dropout rate")->capture_default_str();
  app->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  app->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  app->add_option("--folds", cfg.folds, "Cross-validation folds")->capture_default_str();
  app->add_option("--seed", t.seed, "Random seed")->capture_default_str();
  app->add_flag("--stratified", cfg.stratified, "Stratify folds by label");
  app->add_flag("--bias", t.use_bias, "Add bias terms to both layers");
  app->add_flag("--baseline", cfg.pipeline.baseline, "Skip propagation (feature-only baseline)");
  app->add_flag("--no-doc-subgraph-edges", no_eds, "Drop document-subgraph edges");
  app->add_flag("--no-subgraph-subgraph-edges", no_ess, "Drop subgraph-subgraph edges");
  app->add_flag("--save-models", cfg.save_models, "Write per-fold checkpoints");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.pipeline.census.k = 4;
  cfg.pipeline.census.w = 8;
  cfg.pipeline.train.hidden_dim = 240;
  cfg.pipeline.train.learning_rate = 0.01;
  cfg.pipeline.train.epochs = 160;
  cfg.pipeline.train.dropout_rate = 0.5;
  int workers = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  std::string mode = "faithful";
  std::string feature = "normalized";
  bool no_eds = false;
  bool no_ess = false;

  CLI::App app{"Coherence modeling over a document-subgraph graph"};
  app.require_subcommand(1);
  auto* graphs = app.add_subcommand("graphs", "Build sentence graphs");
  add_common(graphs, cfg, workers);
  add_graph_options(graphs, cfg);
  graphs->add_option("--graphs", cfg.graphs, "Sentence-graph cache to write");

  auto* census = app.add_subcommand("census", "Count k-node subgraphs");
  add_common(census, cfg, workers);
  add_census_options(census, cfg, mode);

  auto* train_eval = app.add_subcommand("train-eval", "Cross-validated training and evaluation");
  add_common(train_eval, cfg, workers);
  add_graph_options(train_eval, cfg);
  add_census_options(train_eval, cfg, mode);
  add_train_options(train_eval, cfg, no_eds, no_ess);

  auto* analyze = app.add_subcommand("analyze", "Subgraph-label correlations and diagnostics");
  add_common(analyze, cfg, workers);
  analyze->add_option("--corpus", cfg.corpus, "Corpus file (JSON lines)");
  analyze->add_option("--labels", cfg.labels, "Label names in class order")->delimiter(',');
  add_census_options(analyze, cfg, mode);
  analyze->add_option("--seed", cfg.pipeline.train.seed, "Permutation seed")->capture_default_str();
  analyze->add_option("--predictions", cfg.predictions, "predictions.jsonl from train-eval");
  analyze->add_option("--correlation-feature", feature, "normalized | count | presence")
      ->capture_default_str();
  analyze->add_option("--permutations", cfg.permutations, "Permutations per p-value")
      ->capture_default_str();
  analyze->add_option("--length-edges", cfg.length_edges, "Upper word-count bucket edges")
      ->delimiter(',');

  const char* env_dir = std::getenv(kOutputDirEnv);
  if (env_dir && *env_dir) cfg.output_dir = env_dir;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.pipeline.census.mode = parse_census_mode(mode);
    cfg.correlation_feature = parse_correlation_feature(feature);
  } catch (const ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  cfg.pipeline.edges.doc_subgraph = !no_eds;
  cfg.pipeline.edges.subgraph_subgraph = !no_ess;
  cfg.pipeline.workers = workers;
  if (!cfg.length_edges.empty() &&
      cfg.length_edges.back() != std::numeric_limits<std::size_t>::max()) {
    cfg.length_edges.push_back(std::numeric_limits<std::size_t>::max());
  }

  try {
    if (graphs->parsed()) cmd_graphs(cfg, out);
    if (census->parsed()) cmd_census(cfg, out);
    if (train_eval->parsed()) cmd_train_eval(cfg, out);
    if (analyze->parsed()) cmd_analyze(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace cohgraph::cli
