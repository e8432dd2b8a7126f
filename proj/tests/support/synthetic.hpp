#pragma once

// Synthetic corpora whose two classes differ only in sentence-graph shape.
//
// Every sentence pair (u, v) that should be linked shares a noun "t<u>_<v>";
// each such token has a one-hot embedding, so the sentence graph built at any
// threshold in (0, 1) reproduces the planned edges exactly. Document
// features are Gaussian noise drawn independently of the class.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cohgraph/corpus.hpp"
#include "cohgraph/random.hpp"
#include "cohgraph/sentgraph.hpp"

namespace cohgraph::synthetic {

enum class Family {
  chain,  // consecutive sentences linked, rare skips
  star,   // local hubs fanning out to the next few sentences
};

struct Options {
  int documents = 200;
  int min_sentences = 10;
  int max_sentences = 16;
  int feature_dim = 16;
  std::uint64_t seed = 7;
};

struct Dataset {
  Corpus corpus;
  EmbeddingTable embeddings;
  FeatureMatrix features;
  std::vector<SentenceGraph> planned;  // intended sentence graph per document
};

// Random forward-edge graph of the given family on n nodes.
SentenceGraph sample_graph(Family family, int n, Rng& rng);

// Even-indexed documents are class 0 (chain), odd ones class 1 (star).
Dataset make_dataset(const Options& options);

// Corpus document whose sentence graph (with `embeddings` from the same
// dataset) equals `graph`.
Document document_for_graph(const std::string& id, int label, const SentenceGraph& graph);

// One-hot table covering every link token for documents up to `max_sentences`.
EmbeddingTable link_embeddings(int max_sentences);

struct Files {
  std::filesystem::path corpus;      // corpus.jsonl
  std::filesystem::path embeddings;  // embeddings.txt
  std::filesystem::path features;    // features.jsonl
};

// Writes the dataset in the on-disk formats the command-line tool reads.
Files write_files(const Dataset& data, const std::filesystem::path& dir);

}  // namespace cohgraph::synthetic
