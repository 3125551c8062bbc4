#include "flatm/eval.hpp"

#include "flatm/error.hpp"
#include "flatm/format.hpp"
#include "flatm/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace flatm {

using nlohmann::json;

namespace {

// Document indices ordered by id, so splits and training order do not depend
// on input order.
std::vector<std::size_t> id_order(const std::vector<RawDocument>& docs) {
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return docs[a].id < docs[b].id; });
  return order;
}

std::map<std::string, std::vector<std::size_t>> group_by_label(const std::vector<RawDocument>& docs,
                                                               bool stratified) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (const std::size_t i : id_order(docs))
    groups[stratified ? docs[i].label.value_or("") : std::string()].push_back(i);
  return groups;
}

void summarize(EvalReport& r) {
  const auto n = static_cast<double>(r.per_fold.size());
  if (r.per_fold.empty()) return;
  r.mean = std::accumulate(r.per_fold.begin(), r.per_fold.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : r.per_fold) ss += (v - r.mean) * (v - r.mean);
  r.stdev = r.per_fold.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

json echo(const TrainConfig& config, const SplitPlan& plan, const EvalOptions& options, Protocol protocol) {
  json j = to_json(config);
  j["protocol"] = protocol == Protocol::Classification ? "classification" : "loglikelihood";
  j["split-seed"] = plan.seed;
  j["train-frac"] = plan.train_fraction;
  j["folds"] = plan.folds;
  j["stratified"] = plan.stratified;
  j["smoothing"] = options.smoothing;
  return j;
}

std::vector<int> fold_ids(const SplitPlan& plan) {
  std::vector<int> ids;
  for (int f = 0; f < std::max(1, plan.folds); ++f) ids.push_back(f);
  return ids;
}

}  // namespace

std::vector<int> assign_folds(const std::vector<RawDocument>& docs, const SplitPlan& plan) {
  if (plan.folds < 1) throw PipelineError("fold count must be >= 1");
  if (plan.folds == 1 && !(plan.train_fraction > 0.0 && plan.train_fraction < 1.0))
    throw PipelineError("train fraction must lie in (0, 1)");
  if (plan.folds > 1 && docs.size() < static_cast<std::size_t>(plan.folds))
    throw PipelineError("fewer documents than folds");

  std::vector<int> fold(docs.size(), -1);
  std::mt19937_64 rng(plan.seed);
  std::size_t offset = 0;
  for (auto& [label, members] : group_by_label(docs, plan.stratified)) {
    std::shuffle(members.begin(), members.end(), rng);
    if (plan.folds > 1) {
      // Round-robin continuing across groups keeps fold sizes within one.
      for (std::size_t r = 0; r < members.size(); ++r)
        fold[members[r]] = static_cast<int>((offset + r) % static_cast<std::size_t>(plan.folds));
      offset += members.size();
    } else {
      const auto n_test = static_cast<std::size_t>(
          std::llround(static_cast<double>(members.size()) * (1.0 - plan.train_fraction)));
      for (std::size_t r = 0; r < std::min(n_test, members.size()); ++r) fold[members[r]] = 0;
    }
  }
  if (std::none_of(fold.begin(), fold.end(), [](int f) { return f == 0; }))
    throw PipelineError("split leaves no test documents");
  if (plan.folds == 1 && std::none_of(fold.begin(), fold.end(), [](int f) { return f < 0; }))
    throw PipelineError("split leaves no training documents");
  return fold;
}

DocumentLikelihood document_loglik(const TopicModel& model, const std::vector<std::string>& tokens,
                                   double smoothing) {
  DocumentLikelihood out;
  const DocumentCounts counts = count_terms(model.vocabulary, tokens);
  out.tokens = counts.total_tokens;
  out.oov_tokens = counts.oov_tokens;
  const double log_floor = std::log(smoothing);
  if (counts.terms.empty()) {
    out.fully_oov = true;
    out.loglik = static_cast<double>(counts.total_tokens) * log_floor;
    return out;
  }
  const Eigen::VectorXd topics = fold_in(model, counts);
  for (const auto& [i, f] : counts.terms) {
    const double p = model.word_given_topic.col(static_cast<Eigen::Index>(i)).dot(topics);
    out.loglik += f * std::log(smoothing + p);
  }
  out.loglik += static_cast<double>(counts.oov_tokens) * log_floor;
  return out;
}

DocumentLikelihood unigram_loglik(const TopicModel& model, const std::vector<std::string>& tokens,
                                  double smoothing) {
  DocumentLikelihood out;
  const DocumentCounts counts = count_terms(model.vocabulary, tokens);
  out.tokens = counts.total_tokens;
  out.oov_tokens = counts.oov_tokens;
  out.fully_oov = counts.terms.empty();
  for (const auto& [i, f] : counts.terms)
    out.loglik += f * std::log(smoothing + model.word_prob[static_cast<Eigen::Index>(i)]);
  out.loglik += static_cast<double>(counts.oov_tokens) * std::log(smoothing);
  return out;
}

std::string EvalReport::metric() const {
  return protocol == Protocol::Classification ? "accuracy" : "loglik";
}

EvalReport classify(const std::vector<RawDocument>& docs, const TrainConfig& config, const SplitPlan& plan,
                    const EvalOptions& options) {
  std::map<std::string, std::size_t> per_label;
  for (const auto& d : docs) {
    if (!d.label) throw PipelineError("classification needs labeled documents; '" + d.id + "' has no label");
    ++per_label[*d.label];
  }
  if (per_label.empty()) throw PipelineError("classification needs at least one document");
  for (const auto& [label, count] : per_label) {
    const std::size_t needed = plan.folds > 1 ? static_cast<std::size_t>(plan.folds) : 2;
    if (count < needed)
      throw PipelineError("class '" + label + "' has " + std::to_string(count) + " documents, needs at least " +
                          std::to_string(needed));
  }
  std::vector<std::string> labels;
  for (const auto& [label, count] : per_label) labels.push_back(label);

  const std::vector<int> fold = assign_folds(docs, plan);
  const std::vector<std::size_t> order = id_order(docs);
  EvalReport report;
  report.protocol = Protocol::Classification;
  report.config = echo(config, plan, options, report.protocol);

  for (const int f : fold_ids(plan)) {
    std::vector<std::size_t> test;
    for (const std::size_t i : order)
      if (fold[i] == f) test.push_back(i);

    std::size_t correct = 0;
    if (labels.size() == 1) {
      correct = test.size();
    } else {
      std::vector<TopicModel> models;
      for (std::size_t c = 0; c < labels.size(); ++c) {
        std::vector<RawDocument> train_docs;
        for (const std::size_t i : order)
          if (fold[i] != f && *docs[i].label == labels[c]) train_docs.push_back(docs[i]);
        if (train_docs.empty()) throw PipelineError("class '" + labels[c] + "' has no training documents in fold");
        TrainConfig cc = config;
        cc.seed = derive_seed(derive_seed(config.seed, static_cast<std::uint64_t>(f)), c);
        models.push_back(train(train_docs, cc));
      }
      for (const std::size_t i : test) {
        const auto tokens = tokenize(docs[i].text, config.tokenizer);
        std::size_t best = 0;
        double best_ll = -INFINITY;
        for (std::size_t c = 0; c < models.size(); ++c) {
          const double ll = document_loglik(models[c], tokens, options.smoothing).loglik;
          if (ll > best_ll) {
            best_ll = ll;
            best = c;
          }
        }
        correct += labels[best] == *docs[i].label ? 1 : 0;
      }
    }
    report.per_fold.push_back(test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size()));
    report.extra["test_docs"].push_back(static_cast<double>(test.size()));
  }
  summarize(report);
  return report;
}

EvalReport heldout_loglik(const std::vector<RawDocument>& docs, const TrainConfig& config, const SplitPlan& plan,
                          const EvalOptions& options) {
  const std::vector<int> fold = assign_folds(docs, plan);
  const std::vector<std::size_t> order = id_order(docs);
  EvalReport report;
  report.protocol = Protocol::LogLikelihood;
  report.config = echo(config, plan, options, report.protocol);

  for (const int f : fold_ids(plan)) {
    std::vector<RawDocument> train_docs;
    std::vector<std::size_t> test;
    for (const std::size_t i : order) {
      if (fold[i] == f)
        test.push_back(i);
      else
        train_docs.push_back(docs[i]);
    }
    TrainConfig cc = config;
    cc.seed = derive_seed(config.seed, static_cast<std::uint64_t>(f));
    const TopicModel model = train(train_docs, cc);

    double ll = 0.0, baseline = 0.0;
    std::size_t oov = 0, tokens = 0, fully_oov = 0;
    for (const std::size_t i : test) {
      const auto toks = tokenize(docs[i].text, config.tokenizer);
      const auto d = document_loglik(model, toks, options.smoothing);
      ll += d.loglik;
      baseline += unigram_loglik(model, toks, options.smoothing).loglik;
      oov += d.oov_tokens;
      tokens += d.tokens;
      fully_oov += d.fully_oov ? 1 : 0;
    }
    if (fully_oov == test.size()) throw PipelineError("every test document is fully out of vocabulary");
    report.per_fold.push_back(ll);
    report.extra["baseline_loglik"].push_back(baseline);
    report.extra["oov_tokens"].push_back(static_cast<double>(oov));
    report.extra["test_tokens"].push_back(static_cast<double>(tokens));
    report.extra["test_docs"].push_back(static_cast<double>(test.size()));
  }
  summarize(report);
  return report;
}

json to_json(const EvalReport& r) {
  json j;
  j["protocol"] = r.protocol == Protocol::Classification ? "classification" : "loglikelihood";
  j["metric"] = r.metric();
  j["per_fold"] = r.per_fold;
  j["mean"] = r.mean;
  j["stdev"] = r.stdev;
  for (const auto& [name, values] : r.extra) j["per_fold_" + name] = values;
  j["config"] = r.config;
  return j;
}

void write_report_text(std::ostream& out, const EvalReport& r) {
  std::vector<std::string> header{"fold", r.metric()};
  for (const auto& [name, values] : r.extra) header.push_back(name);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
    std::vector<std::string> row{std::to_string(f), format_double(r.per_fold[f])};
    for (const auto& [name, values] : r.extra) row.push_back(format_double(values[f]));
    rows.push_back(std::move(row));
  }
  rows.push_back({"mean", format_double(r.mean)});
  rows.push_back({"stdev", format_double(r.stdev)});
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  const auto print = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << row[c];
    out << '\n';
  };
  out << "protocol: " << (r.protocol == Protocol::Classification ? "classification" : "loglikelihood") << '\n';
  print(header);
  for (const auto& row : rows) print(row);
}

void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << "fold,metric,value\n";
  for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
    out << f << ',' << r.metric() << ',' << format_double(r.per_fold[f]) << '\n';
    for (const auto& [name, values] : r.extra) out << f << ',' << name << ',' << format_double(values[f]) << '\n';
  }
}

std::string synthetic_term(int cls, int index) { return "c" + std::to_string(cls) + "w" + std::to_string(index); }
std::string shared_term(int index) { return "sw" + std::to_string(index); }

std::vector<RawDocument> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 1 || spec.vocab_per_class < 1 || spec.docs_per_class < 1 || spec.doc_length < 1)
    throw PipelineError("synthetic corpus sizes must be positive");
  if (!(spec.overlap_fraction >= 0.0 && spec.overlap_fraction < 1.0))
    throw PipelineError("overlap fraction must lie in [0, 1)");
  const int shared = static_cast<int>(std::lround(spec.overlap_fraction * spec.vocab_per_class));

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> pick(0, spec.vocab_per_class + shared - 1);
  std::vector<RawDocument> docs;
  docs.reserve(static_cast<std::size_t>(spec.classes) * static_cast<std::size_t>(spec.docs_per_class));
  const int width = static_cast<int>(std::to_string(spec.classes * spec.docs_per_class).size());
  for (int c = 0; c < spec.classes; ++c) {
    for (int d = 0; d < spec.docs_per_class; ++d) {
      std::string text;
      for (int t = 0; t < spec.doc_length; ++t) {
        const int w = pick(rng);
        if (t) text += ' ';
        text += w < spec.vocab_per_class ? synthetic_term(c, w) : shared_term(w - spec.vocab_per_class);
      }
      std::ostringstream id;
      id << "doc" << std::setw(width) << std::setfill('0') << docs.size();
      docs.push_back({id.str(), "class" + std::to_string(c), std::move(text)});
    }
  }
  return docs;
}

}  // namespace flatm
