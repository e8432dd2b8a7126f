#pragma once

// Documents, word embeddings, document features and fold plans, plus their
// newline-delimited JSON file formats.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cohgraph {

struct Sentence {
  int index = 0;  // 1-based position within the document
  std::vector<std::string> nouns;
  std::optional<std::string> text;

  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string id;
  std::optional<int> label;  // 0-based class index
  std::vector<Sentence> sentences;

  std::size_t sentence_count() const { return sentences.size(); }
  // Whitespace-delimited words of the sentence texts; sentences without text
  // contribute their noun count.
  std::size_t word_count() const;

  bool operator==(const Document&) const = default;
};

// Loaded documents plus the mapping from class index back to the label string
// found in the file.
struct Corpus {
  std::vector<Document> documents;
  std::vector<std::string> label_names;

  int num_classes() const { return static_cast<int>(label_names.size()); }
  std::vector<std::string> ids() const;
  const Document* find(const std::string& id) const;
};

// How label values in a corpus file become class indices.
//   automatic: if every label is a non-negative integer (JSON number or
//              digit string) the integer is the class index; otherwise the
//              distinct strings are sorted and numbered from 0.
//   explicit:  `names[c]` is the label of class c; unknown labels are errors.
struct LabelScheme {
  std::vector<std::string> names;  // empty = automatic

  static LabelScheme automatic() { return {}; }
};

Corpus load_corpus(const std::filesystem::path& path,
                   const LabelScheme& scheme = LabelScheme::automatic());
Corpus parse_corpus(std::istream& in, const std::string& source,
                    const LabelScheme& scheme = LabelScheme::automatic());
void write_corpus(std::ostream& out, const Corpus& corpus);

// Rejects documents without labels (training mode).
void require_labels(const Corpus& corpus);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }

  // Returns an empty optional for tokens not in the table; never a zero vector.
  std::optional<std::span<const double>> find(const std::string& token) const;
  bool contains(const std::string& token) const { return entries_.contains(token); }

  // Replaces any existing vector for `token`. Throws ValidationError on a
  // dimension mismatch.
  void insert(std::string token, std::vector<double> vec);

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::istream& in, const std::string& source);

class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<double>* find(const std::string& id) const;
  void insert(std::string id, std::vector<double> row);

  // Throws ValidationError naming the first id without a row.
  void require_rows(std::span<const std::string> ids) const;

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> rows_;
};

FeatureMatrix load_features(const std::filesystem::path& path);
FeatureMatrix parse_features(std::istream& in, const std::string& source);
void write_features(std::ostream& out, const FeatureMatrix& features,
                    std::span<const std::string> order);

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> test;

  bool operator==(const Fold&) const = default;
};

struct FoldPlan {
  std::vector<Fold> folds;
  std::uint64_t seed = 0;

  bool operator==(const FoldPlan&) const = default;
};

// Shuffles ids with Rng(seed) and cuts the permutation into `folds`
// contiguous test blocks whose sizes differ by at most one (the first
// size % folds blocks get the extra id). Train ids keep the input order.
FoldPlan make_folds(std::span<const std::string> ids, int folds, std::uint64_t seed);

// Stratified variant: ids are grouped by label, each group is shuffled and
// dealt round-robin across folds, continuing where the previous group stopped.
FoldPlan make_stratified_folds(std::span<const std::string> ids, std::span<const int> labels,
                               int folds, std::uint64_t seed);

void write_fold_plan(std::ostream& out, const FoldPlan& plan);
FoldPlan parse_fold_plan(std::istream& in, const std::string& source);

}  // namespace cohgraph
