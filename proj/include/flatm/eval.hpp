#pragma once

#include "flatm/corpus.hpp"
#include "flatm/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace flatm {

// folds >= 2: k-fold cross-validation (train_fraction is implied by folds).
// folds == 1: one holdout split using train_fraction.
struct SplitPlan {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  int folds = 5;
  bool stratified = true;
};

// Fold index per document; a document belongs to the test set of its fold.
// Holdout (folds == 1) marks test documents 0 and training documents -1.
std::vector<int> assign_folds(const std::vector<RawDocument>& docs, const SplitPlan& plan);

inline constexpr double kDefaultSmoothing = 1e-9;

struct EvalOptions {
  double smoothing = kDefaultSmoothing;  // added to each token's mixture probability
};

struct DocumentLikelihood {
  double loglik = 0.0;
  std::size_t tokens = 0;
  std::size_t oov_tokens = 0;
  bool fully_oov = false;
};

// sum over tokens of log(delta + sum_k P(w|T_k) P(T_k|d)); OOV tokens score log(delta).
DocumentLikelihood document_loglik(const TopicModel& model, const std::vector<std::string>& tokens,
                                   double smoothing = kDefaultSmoothing);
// Same with P(w|d) replaced by the model's unigram P(w).
DocumentLikelihood unigram_loglik(const TopicModel& model, const std::vector<std::string>& tokens,
                                  double smoothing = kDefaultSmoothing);

enum class Protocol { Classification, LogLikelihood };

struct EvalReport {
  Protocol protocol = Protocol::Classification;
  std::vector<double> per_fold;
  // Additional per-fold series, e.g. "baseline_loglik", "oov_tokens".
  std::map<std::string, std::vector<double>> extra;
  double mean = 0.0;
  double stdev = 0.0;
  nlohmann::json config;

  std::string metric() const;
};

EvalReport classify(const std::vector<RawDocument>& docs, const TrainConfig& config, const SplitPlan& plan,
                    const EvalOptions& options = {});
EvalReport heldout_loglik(const std::vector<RawDocument>& docs, const TrainConfig& config, const SplitPlan& plan,
                          const EvalOptions& options = {});

nlohmann::json to_json(const EvalReport& report);
void write_report_text(std::ostream& out, const EvalReport& report);
// `fold,metric,value` rows, header first.
void write_report_csv(std::ostream& out, const EvalReport& report);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int classes = 3;
  int vocab_per_class = 50;
  int docs_per_class = 100;
  int doc_length = 50;
  double overlap_fraction = 0.0;
};

// Class c draws tokens uniformly from its own pool "c<c>w<i>" plus a shared
// pool "sw<i>" of round(overlap * vocab_per_class) terms. Labels are "class<c>".
std::vector<RawDocument> generate_synthetic(const SyntheticSpec& spec);

std::string synthetic_term(int cls, int index);
std::string shared_term(int index);

}  // namespace flatm
