#pragma once

#include "flatm/corpus.hpp"
#include "flatm/fcm.hpp"
#include "flatm/weighting.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace flatm {

// Cluster counts of the dimension-reduction cascade, strictly descending.
struct CascadeSchedule {
  std::vector<int> cluster_counts{10, 9, 8, 7, 6, 5, 4, 3, 2};

  void validate(Eigen::Index n_words) const;
  static CascadeSchedule parse(const std::string& csv);
  std::string to_string() const;
};

struct FcmOptions {
  double fuzzifier = 2.0;
  double threshold = 1e-5;
  int max_iterations = 100;
};

struct TrainConfig {
  TokenizerConfig tokenizer;
  BuildOptions build;
  GtwMethod gtw = GtwMethod::Entropy;
  WeightingOptions weighting;
  int topics = 10;
  CascadeSchedule schedule;
  // false clusters words directly in document space (ablation, not the cascade).
  bool cascade = true;
  FcmOptions fcm;
  std::uint64_t seed = 0;
};

// Seed for FCM stage `stage` of a training run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage);

struct StageReport {
  int clusters = 0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  int center_resets = 0;
};

struct TopicModel {
  Vocabulary vocabulary;
  TrainConfig config;
  GlobalWeightVector weights;
  Eigen::MatrixXd topic_given_word;  // m x K, rows sum to 1
  Eigen::VectorXd word_prob;         // length m, sums to 1
  Eigen::MatrixXd word_given_topic;  // K x m, rows sum to 1
  Eigen::MatrixXd topic_given_doc;   // K x n, columns sum to 1
  std::vector<std::string> doc_ids;
  std::vector<StageReport> stages;

  Eigen::Index topics() const { return topic_given_word.cols(); }
  // Joint mass of each topic before normalizing P(W|T).
  Eigen::VectorXd topic_mass() const;
};

using StageObserver = std::function<void(int stage, int clusters, int iteration, double objective, double delta)>;

// Repeated FCM over the words: first in document space, then on each
// stage's membership matrix. Returns the last stage's m x c membership.
Eigen::MatrixXd cascade_reduce(const WeightedMatrix& a, const CascadeSchedule& schedule, const FcmOptions& fcm,
                               std::uint64_t seed, std::vector<StageReport>* stages = nullptr,
                               const StageObserver& observer = {});

// One FCM run with K clusters over the reduced word coordinates; returns P(T|W).
Eigen::MatrixXd topic_memberships(const Eigen::MatrixXd& reduced, int topics, const FcmOptions& fcm,
                                  std::uint64_t seed, StageReport* report = nullptr,
                                  const StageObserver& observer = {}, int stage_index = 0);

TopicModel train(const BuiltCorpus& corpus, const TrainConfig& config, const StageObserver& observer = {});
TopicModel train(const std::vector<RawDocument>& docs, const TrainConfig& config,
                 const StageObserver& observer = {});

// P(T|d) for in-vocabulary counts of a new document.
Eigen::VectorXd fold_in(const TopicModel& model, const DocumentCounts& counts, const std::string& doc_id = "");
Eigen::VectorXd fold_in(const TopicModel& model, const RawDocument& doc);

std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, Eigen::Index topic,
                                                      std::size_t count);

}  // namespace flatm
