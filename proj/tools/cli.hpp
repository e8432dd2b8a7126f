#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohgraph/analysis.hpp"
#include "cohgraph/pipeline.hpp"

namespace cohgraph::cli {

// Environment variable that replaces the default output directory.
inline constexpr const char* kOutputDirEnv = "COHGRAPH_OUTPUT_DIR";

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path embeddings;
  std::filesystem::path features;
  std::filesystem::path graphs;  // sentence-graph cache; default <out>/graphs.jsonl
  std::filesystem::path census;  // subgraph-set cache; default <out>/census.jsonl
  std::filesystem::path predictions;
  std::filesystem::path output_dir = "cohgraph-out";
  std::vector<std::string> labels;  // explicit label order, optional

  PipelineConfig pipeline;
  int folds = 10;
  bool stratified = false;
  bool save_models = false;

  CorrelationFeature correlation_feature = CorrelationFeature::normalized_frequency;
  int permutations = 10000;
  std::vector<std::size_t> length_edges = kDefaultLengthEdges;

  nlohmann::json to_json() const;
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Parses argv and runs one subcommand: graphs, census, train-eval, analyze.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Subcommands, callable directly with a validated config.
void cmd_graphs(const RunConfig& cfg, std::ostream& log);
void cmd_census(const RunConfig& cfg, std::ostream& log);
CvReport cmd_train_eval(const RunConfig& cfg, std::ostream& log);
void cmd_analyze(const RunConfig& cfg, std::ostream& log);

}  // namespace cohgraph::cli
