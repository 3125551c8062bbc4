#pragma once

#include <Eigen/SparseCore>

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace flatm {

struct RawDocument {
  std::string id;
  std::optional<std::string> label;
  std::string text;
};

using StopwordSet = std::set<std::string, std::less<>>;

// The stop-word list compiled in from data/stopwords_en.txt.
const StopwordSet& default_stopwords();

// One word per line, '#' starts a comment. Words are lowercased.
StopwordSet parse_stopwords(std::istream& in);
StopwordSet load_stopwords(const std::filesystem::path& path);

struct TokenizerConfig {
  bool lowercase = true;
  std::size_t min_token_length = 2;  // in code points
  bool drop_numeric_tokens = true;
  StopwordSet stopwords = default_stopwords();
};

// Splits on every run of non-alphanumeric ASCII bytes. Bytes >= 0x80 are
// kept inside tokens so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

enum class CorpusFormat { DirOfTxt, LabeledTsv, Lines };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat format);

struct LoadOptions {
  bool allow_empty = false;
};

std::vector<RawDocument> load_corpus(const std::filesystem::path& path, CorpusFormat format,
                                     const LoadOptions& options = {});

// Stream variants of the line-based formats. `source` names the input in errors.
std::vector<RawDocument> read_labeled_tsv(std::istream& in, std::string_view source,
                                          const LoadOptions& options = {});
std::vector<RawDocument> read_lines(std::istream& in, std::string_view source,
                                    const LoadOptions& options = {});

void write_labeled_tsv(std::ostream& out, const std::vector<RawDocument>& docs);

class Vocabulary {
 public:
  Vocabulary() = default;
  // Terms are sorted and deduplicated.
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  std::optional<std::size_t> index(std::string_view term) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Raw counts f_ij: terms are rows, documents are columns. Only positive
// counts are stored.
struct TermDocMatrix {
  Eigen::SparseMatrix<double> counts;
  std::vector<std::string> doc_ids;

  Eigen::Index n_terms() const { return counts.rows(); }
  Eigen::Index n_docs() const { return counts.cols(); }
};

struct BuildOptions {
  // Terms occurring in fewer documents are dropped. 1 keeps everything.
  std::size_t min_df = 1;
};

struct BuiltCorpus {
  Vocabulary vocabulary;
  TermDocMatrix matrix;
};

BuiltCorpus build_matrix(const std::vector<RawDocument>& docs, const TokenizerConfig& config,
                         const BuildOptions& options = {});

// In-vocabulary term counts of one document, sorted by term index.
struct DocumentCounts {
  std::vector<std::pair<std::size_t, double>> terms;
  std::size_t oov_tokens = 0;
  std::size_t total_tokens = 0;
};

DocumentCounts count_terms(const Vocabulary& vocabulary, const std::vector<std::string>& tokens);

}  // namespace flatm
