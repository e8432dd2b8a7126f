#include "cohgraph/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cohgraph/error.hpp"
#include "cohgraph/random.hpp"
#include "jsonl.hpp"

namespace cohgraph {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

bool is_digit_string(const std::string& s) {
  return !s.empty() && s.size() < 10 &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Raw label as it appeared in the file, before mapping to a class index.
struct RawLabel {
  std::string text;
  bool integral = false;
};

std::optional<RawLabel> read_label(const json& value) {
  if (value.is_null()) return std::nullopt;
  if (value.is_number_integer()) {
    const auto v = value.get<long long>();
    return RawLabel{std::to_string(v), v >= 0};
  }
  if (value.is_string()) {
    auto s = value.get<std::string>();
    const bool integral = is_digit_string(s);
    return RawLabel{std::move(s), integral};
  }
  throw ValidationError("label must be a string, an integer or null");
}

}  // namespace

std::size_t Document::word_count() const {
  std::size_t words = 0;
  for (const auto& s : sentences) {
    if (!s.text) {
      words += s.nouns.size();
      continue;
    }
    std::istringstream ss(*s.text);
    std::string w;
    while (ss >> w) ++words;
  }
  return words;
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(documents.size());
  for (const auto& d : documents) out.push_back(d.id);
  return out;
}

const Document* Corpus::find(const std::string& id) const {
  for (const auto& d : documents) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

Corpus parse_corpus(std::istream& in, const std::string& source, const LabelScheme& scheme) {
  Corpus corpus;
  std::vector<std::optional<RawLabel>> raw_labels;
  std::vector<std::size_t> lines;
  std::unordered_set<std::string> seen;

  detail::for_each_record(in, source, [&](const json& rec, std::size_t line) {
    if (!rec.is_object()) throw ParseError(source, line, "record is not an object");
    if (!rec.contains("id") || !rec.at("id").is_string()) {
      throw ParseError(source, line, "missing string field \"id\"");
    }
    if (!rec.contains("sentences") || !rec.at("sentences").is_array()) {
      throw ParseError(source, line, "missing array field \"sentences\"");
    }
    Document doc;
    doc.id = rec.at("id").get<std::string>();
    if (!seen.insert(doc.id).second) {
      throw ValidationError(source + ":" + std::to_string(line) + ": duplicate document id \"" +
                            doc.id + "\"");
    }
    int index = 0;
    for (const auto& s : rec.at("sentences")) {
      Sentence sent;
      sent.index = ++index;
      if (!s.is_object()) throw ParseError(source, line, "sentence is not an object");
      if (s.contains("nouns")) sent.nouns = s.at("nouns").get<std::vector<std::string>>();
      if (s.contains("text") && !s.at("text").is_null()) sent.text = s.at("text").get<std::string>();
      doc.sentences.push_back(std::move(sent));
    }
    try {
      raw_labels.push_back(rec.contains("label") ? read_label(rec.at("label")) : std::nullopt);
    } catch (const ValidationError& e) {
      throw ParseError(source, line, e.what());
    }
    lines.push_back(line);
    corpus.documents.push_back(std::move(doc));
  });

  if (!scheme.names.empty()) {
    corpus.label_names = scheme.names;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      if (!raw_labels[i]) continue;
      const auto it = std::find(scheme.names.begin(), scheme.names.end(), raw_labels[i]->text);
      if (it == scheme.names.end()) {
        throw ParseError(source, lines[i], "unknown label \"" + raw_labels[i]->text + "\"");
      }
      corpus.documents[i].label = static_cast<int>(it - scheme.names.begin());
    }
    return corpus;
  }

  const bool all_integral = std::all_of(raw_labels.begin(), raw_labels.end(),
                                        [](const auto& l) { return !l || l->integral; });
  if (all_integral) {
    int max_label = -1;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      if (!raw_labels[i]) continue;
      const int c = std::stoi(raw_labels[i]->text);
      corpus.documents[i].label = c;
      max_label = std::max(max_label, c);
    }
    for (int c = 0; c <= max_label; ++c) corpus.label_names.push_back(std::to_string(c));
    return corpus;
  }

  std::set<std::string> distinct;
  for (const auto& l : raw_labels) {
    if (l) distinct.insert(l->text);
  }
  corpus.label_names.assign(distinct.begin(), distinct.end());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    if (!raw_labels[i]) continue;
    const auto pos = std::lower_bound(corpus.label_names.begin(), corpus.label_names.end(),
                                      raw_labels[i]->text);
    corpus.documents[i].label = static_cast<int>(pos - corpus.label_names.begin());
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LabelScheme& scheme) {
  auto in = open_input(path);
  return parse_corpus(in, path.string(), scheme);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.documents) {
    json rec;
    rec["id"] = doc.id;
    if (doc.label) {
      const auto c = static_cast<std::size_t>(*doc.label);
      rec["label"] = c < corpus.label_names.size() ? corpus.label_names[c] : std::to_string(c);
    } else {
      rec["label"] = nullptr;
    }
    json sentences = json::array();
    for (const auto& s : doc.sentences) {
      json js;
      js["nouns"] = s.nouns;
      if (s.text) js["text"] = *s.text;
      sentences.push_back(std::move(js));
    }
    rec["sentences"] = std::move(sentences);
    out << detail::dump_line(rec) << '\n';
  }
}

void require_labels(const Corpus& corpus) {
  for (const auto& d : corpus.documents) {
    if (!d.label) throw ValidationError("document \"" + d.id + "\" has no label");
    if (*d.label < 0 || *d.label >= corpus.num_classes()) {
      throw ValidationError("document \"" + d.id + "\" has label index out of range");
    }
  }
}

// ---------------------------------------------------------------------------

std::optional<std::span<const double>> EmbeddingTable::find(const std::string& token) const {
  const auto it = entries_.find(token);
  if (it == entries_.end()) return std::nullopt;
  return std::span<const double>(it->second);
}

void EmbeddingTable::insert(std::string token, std::vector<double> vec) {
  if (dimension_ == 0) dimension_ = vec.size();
  if (vec.size() != dimension_ || dimension_ == 0) {
    throw ValidationError("embedding for \"" + token + "\" has dimension " +
                          std::to_string(vec.size()) + ", expected " + std::to_string(dimension_));
  }
  entries_[std::move(token)] = std::move(vec);
}

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> vec;
    std::string field;
    while (ss >> field) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size()) {
        throw ParseError(source, line_no, "non-numeric component \"" + field + "\"");
      }
      vec.push_back(v);
    }
    if (vec.empty()) throw ParseError(source, line_no, "token \"" + token + "\" has no vector");
    if (table.size() > 0 && vec.size() != table.dimension()) {
      throw ParseError(source, line_no,
                       "dimension " + std::to_string(vec.size()) + " does not match " +
                           std::to_string(table.dimension()));
    }
    table.insert(std::move(token), std::move(vec));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_embeddings(in, path.string());
}

// ---------------------------------------------------------------------------

const std::vector<double>* FeatureMatrix::find(const std::string& id) const {
  const auto it = rows_.find(id);
  return it == rows_.end() ? nullptr : &it->second;
}

void FeatureMatrix::insert(std::string id, std::vector<double> row) {
  if (dimension_ == 0) dimension_ = row.size();
  if (row.size() != dimension_ || dimension_ == 0) {
    throw ValidationError("feature row for \"" + id + "\" has dimension " +
                          std::to_string(row.size()) + ", expected " + std::to_string(dimension_));
  }
  rows_[std::move(id)] = std::move(row);
}

void FeatureMatrix::require_rows(std::span<const std::string> ids) const {
  for (const auto& id : ids) {
    if (!rows_.contains(id)) throw ValidationError("no feature row for document \"" + id + "\"");
  }
}

FeatureMatrix parse_features(std::istream& in, const std::string& source) {
  FeatureMatrix features;
  detail::for_each_record(in, source, [&](const json& rec, std::size_t line) {
    auto id = rec.at("id").get<std::string>();
    auto row = rec.at("feature").get<std::vector<double>>();
    if (features.find(id)) throw ParseError(source, line, "duplicate feature row \"" + id + "\"");
    try {
      features.insert(std::move(id), std::move(row));
    } catch (const ValidationError& e) {
      throw ParseError(source, line, e.what());
    }
  });
  return features;
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_features(in, path.string());
}

void write_features(std::ostream& out, const FeatureMatrix& features,
                    std::span<const std::string> order) {
  for (const auto& id : order) {
    const auto* row = features.find(id);
    if (!row) continue;
    out << detail::dump_line(json{{"id", id}, {"feature", *row}}) << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

FoldPlan assemble(std::span<const std::string> ids, const std::vector<std::vector<std::string>>& tests,
                  std::uint64_t seed) {
  FoldPlan plan;
  plan.seed = seed;
  for (const auto& test : tests) {
    const std::unordered_set<std::string> held_out(test.begin(), test.end());
    Fold fold;
    fold.test = test;
    for (const auto& id : ids) {
      if (!held_out.contains(id)) fold.train.push_back(id);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

void check_fold_args(std::span<const std::string> ids, int folds) {
  if (folds < 2) throw ValidationError("fold count must be at least 2");
  if (static_cast<std::size_t>(folds) > ids.size()) {
    throw ValidationError("fold count " + std::to_string(folds) + " exceeds " +
                          std::to_string(ids.size()) + " documents");
  }
  const std::unordered_set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw ValidationError("duplicate ids in fold input");
}

}  // namespace

FoldPlan make_folds(std::span<const std::string> ids, int folds, std::uint64_t seed) {
  check_fold_args(ids, folds);
  std::vector<std::string> order(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(order);

  const auto k = static_cast<std::size_t>(folds);
  const std::size_t base = order.size() / k;
  const std::size_t extra = order.size() % k;
  std::vector<std::vector<std::string>> tests(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    tests[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return assemble(ids, tests, seed);
}

FoldPlan make_stratified_folds(std::span<const std::string> ids, std::span<const int> labels,
                               int folds, std::uint64_t seed) {
  check_fold_args(ids, folds);
  if (labels.size() != ids.size()) throw ValidationError("labels and ids differ in length");
  std::map<int, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < ids.size(); ++i) groups[labels[i]].push_back(ids[i]);

  Rng rng(seed);
  std::vector<std::vector<std::string>> tests(static_cast<std::size_t>(folds));
  std::size_t next = 0;
  for (auto& [label, members] : groups) {
    rng.shuffle(members);
    for (auto& id : members) {
      tests[next].push_back(id);
      next = (next + 1) % tests.size();
    }
  }
  return assemble(ids, tests, seed);
}

void write_fold_plan(std::ostream& out, const FoldPlan& plan) {
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    json rec{{"fold", f},
             {"seed", plan.seed},
             {"train", plan.folds[f].train},
             {"test", plan.folds[f].test}};
    out << detail::dump_line(rec) << '\n';
  }
}

FoldPlan parse_fold_plan(std::istream& in, const std::string& source) {
  FoldPlan plan;
  detail::for_each_record(in, source, [&](const json& rec, std::size_t line) {
    if (rec.at("fold").get<std::size_t>() != plan.folds.size()) {
      throw ParseError(source, line, "folds out of order");
    }
    plan.seed = rec.at("seed").get<std::uint64_t>();
    plan.folds.push_back(Fold{rec.at("train").get<std::vector<std::string>>(),
                              rec.at("test").get<std::vector<std::string>>()});
  });
  return plan;
}

}  // namespace cohgraph
