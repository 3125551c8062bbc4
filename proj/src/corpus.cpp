#include "flatm/corpus.hpp"

#include "flatm/error.hpp"
#include "flatm/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace flatm {
namespace detail {
extern const std::string_view kDefaultStopwordText;
}

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](unsigned char c) { return (c & 0xC0) != 0x80; }));
}

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string lowercase_ascii(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

}  // namespace

StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(std::move(line));
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    words.insert(lowercase_ascii(line.substr(first, last - first + 1)));
  }
  return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stop-word list: " + path.string());
  return parse_stopwords(in);
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = [] {
    std::istringstream in{std::string(detail::kDefaultStopwordText)};
    return parse_stopwords(in);
  }();
  return words;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && !is_token_byte(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && is_token_byte(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) continue;
    std::string token(text.substr(start, pos - start));
    if (config.lowercase) token = lowercase_ascii(std::move(token));
    if (code_points(token) < config.min_token_length) continue;
    if (config.drop_numeric_tokens && all_digits(token)) continue;
    if (config.stopwords.contains(token)) continue;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "dir" || name == "dir-of-txt") return CorpusFormat::DirOfTxt;
  if (name == "tsv" || name == "labeled-tsv") return CorpusFormat::LabeledTsv;
  if (name == "lines") return CorpusFormat::Lines;
  throw std::invalid_argument("unknown corpus format: " + std::string(name));
}

std::string_view to_string(CorpusFormat format) {
  switch (format) {
    case CorpusFormat::DirOfTxt: return "dir-of-txt";
    case CorpusFormat::LabeledTsv: return "labeled-tsv";
    case CorpusFormat::Lines: return "lines";
  }
  return "unknown";
}

namespace {

void check_unique_ids(const std::vector<RawDocument>& docs, std::string_view source) {
  std::set<std::string_view> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.id).second)
      throw IoError(std::string(source) + ": duplicate document id '" + d.id + "'");
  }
}

void check_empty(const RawDocument& doc, const LoadOptions& options, std::string_view where) {
  if (!options.allow_empty && doc.text.empty())
    throw IoError(std::string(where) + ": empty document text");
}

std::vector<RawDocument> load_directory(const std::filesystem::path& dir, const LoadOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (fs::recursive_directory_iterator it(dir, ec), end; it != end; it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file() && it->path().extension() == ".txt") files.push_back(it->path());
  }
  if (ec) throw IoError("cannot read directory " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  std::vector<RawDocument> docs;
  docs.reserve(files.size());
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    RawDocument doc{file.stem().string(), std::nullopt, text.str()};
    check_empty(doc, options, file.string());
    docs.push_back(std::move(doc));
  }
  check_unique_ids(docs, dir.string());
  return docs;
}

std::vector<RawDocument> read_line_docs(std::istream& in, std::string_view source,
                                        const LoadOptions& options, bool labeled) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    RawDocument doc;
    doc.id = std::to_string(line_no);
    if (labeled) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw IoError(where + ": malformed line, expected label<TAB>text");
      doc.label = line.substr(0, tab);
      doc.text = line.substr(tab + 1);
      if (doc.label->empty()) throw IoError(where + ": empty label");
    } else {
      doc.text = std::move(line);
    }
    check_empty(doc, options, where);
    docs.push_back(std::move(doc));
  }
  if (in.bad()) throw IoError(std::string(source) + ": read failure");
  return docs;
}

}  // namespace

std::vector<RawDocument> read_labeled_tsv(std::istream& in, std::string_view source,
                                          const LoadOptions& options) {
  return read_line_docs(in, source, options, true);
}

std::vector<RawDocument> read_lines(std::istream& in, std::string_view source, const LoadOptions& options) {
  return read_line_docs(in, source, options, false);
}

std::vector<RawDocument> load_corpus(const std::filesystem::path& path, CorpusFormat format,
                                     const LoadOptions& options) {
  if (format == CorpusFormat::DirOfTxt) return load_directory(path, options);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return format == CorpusFormat::LabeledTsv ? read_labeled_tsv(in, path.string(), options)
                                            : read_lines(in, path.string(), options);
}

void write_labeled_tsv(std::ostream& out, const std::vector<RawDocument>& docs) {
  for (const auto& d : docs) out << d.label.value_or("") << '\t' << d.text << '\n';
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);
}

std::optional<std::size_t> Vocabulary::index(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

BuiltCorpus build_matrix(const std::vector<RawDocument>& docs, const TokenizerConfig& config,
                         const BuildOptions& options) {
  if (docs.empty()) throw PipelineError("cannot build a term-document matrix from zero documents");

  // Per-document term counts; each worker writes only its own slots.
  std::vector<std::map<std::string, double, std::less<>>> per_doc(docs.size());
  parallel_for(
      docs.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j)
          for (auto& tok : tokenize(docs[j].text, config)) per_doc[j][std::move(tok)] += 1.0;
      },
      16);

  std::map<std::string, std::size_t, std::less<>> doc_freq;
  for (const auto& counts : per_doc)
    for (const auto& [term, c] : counts) ++doc_freq[term];
  if (doc_freq.empty()) throw PipelineError("every document tokenized to nothing (all stop words or filtered)");

  std::vector<std::string> terms;
  for (const auto& [term, df] : doc_freq)
    if (df >= options.min_df) terms.push_back(term);
  if (terms.empty()) throw PipelineError("no term survives min-df = " + std::to_string(options.min_df));

  BuiltCorpus out{Vocabulary(std::move(terms)), {}};
  const auto m = static_cast<Eigen::Index>(out.vocabulary.size());
  const auto n = static_cast<Eigen::Index>(docs.size());

  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (const auto& [term, c] : per_doc[static_cast<std::size_t>(j)]) {
      if (auto i = out.vocabulary.index(term))
        triplets.emplace_back(static_cast<Eigen::Index>(*i), j, c);
    }
  }
  out.matrix.counts.resize(m, n);
  out.matrix.counts.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.counts.makeCompressed();
  out.matrix.doc_ids.reserve(docs.size());
  for (const auto& d : docs) out.matrix.doc_ids.push_back(d.id);
  return out;
}

DocumentCounts count_terms(const Vocabulary& vocabulary, const std::vector<std::string>& tokens) {
  DocumentCounts out;
  out.total_tokens = tokens.size();
  std::map<std::size_t, double> counts;
  for (const auto& tok : tokens) {
    if (auto i = vocabulary.index(tok))
      counts[*i] += 1.0;
    else
      ++out.oov_tokens;
  }
  out.terms.assign(counts.begin(), counts.end());
  return out;
}

}  // namespace flatm
