#include "flatm/model.hpp"

#include "flatm/assembly.hpp"
#include "flatm/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace flatm {

void CascadeSchedule::validate(Eigen::Index n_words) const {
  if (cluster_counts.empty()) throw PipelineError("cascade schedule is empty");
  for (std::size_t s = 1; s < cluster_counts.size(); ++s) {
    if (cluster_counts[s] >= cluster_counts[s - 1])
      throw PipelineError("cascade schedule must be strictly descending: " + to_string());
  }
  if (cluster_counts.back() < 2) throw PipelineError("cascade schedule must end at 2 or more clusters");
  if (cluster_counts.front() >= n_words)
    throw PipelineError("cascade starts at " + std::to_string(cluster_counts.front()) +
                        " clusters but the vocabulary has only " + std::to_string(n_words) + " words");
}

CascadeSchedule CascadeSchedule::parse(const std::string& csv) {
  CascadeSchedule s;
  s.cluster_counts.clear();
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad cascade entry: " + item);
    s.cluster_counts.push_back(v);
  }
  if (s.cluster_counts.empty()) throw std::invalid_argument("empty cascade schedule");
  return s;
}

std::string CascadeSchedule::to_string() const {
  std::string out;
  for (std::size_t s = 0; s < cluster_counts.size(); ++s) {
    if (s) out += ',';
    out += std::to_string(cluster_counts[s]);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stage), static_cast<std::uint32_t>(stage >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Eigen::VectorXd TopicModel::topic_mass() const {
  return (topic_given_word.array().colwise() * word_prob.array()).colwise().sum().transpose();
}

namespace {

FcmResult<double> run_stage(const Eigen::MatrixXd& data, int clusters, const FcmOptions& fcm, std::uint64_t seed,
                            int stage, const StageObserver& observer) {
  FcmConfig<double> cfg{clusters, fcm.fuzzifier, fcm.threshold, fcm.max_iterations, seed};
  FcmObserver<double> hook;
  if (observer) {
    hook = [&observer, stage, clusters](int it, double j, double d) { observer(stage, clusters, it, j, d); };
  }
  return fcm_run(data, cfg, hook);
}

StageReport summarize(const FcmResult<double>& r, int clusters) {
  return {clusters, r.iterations, r.converged, r.objective_trace.empty() ? 0.0 : r.objective_trace.back(),
          r.center_resets};
}

}  // namespace

Eigen::MatrixXd cascade_reduce(const WeightedMatrix& a, const CascadeSchedule& schedule, const FcmOptions& fcm,
                               std::uint64_t seed, std::vector<StageReport>* stages, const StageObserver& observer) {
  schedule.validate(a.values.rows());
  Eigen::MatrixXd points = Eigen::MatrixXd(a.values);
  for (std::size_t s = 0; s < schedule.cluster_counts.size(); ++s) {
    const int c = schedule.cluster_counts[s];
    auto r = run_stage(points, c, fcm, derive_seed(seed, s), static_cast<int>(s), observer);
    if (stages) stages->push_back(summarize(r, c));
    points = std::move(r.membership);
  }
  return points;
}

Eigen::MatrixXd topic_memberships(const Eigen::MatrixXd& reduced, int topics, const FcmOptions& fcm,
                                  std::uint64_t seed, StageReport* report, const StageObserver& observer,
                                  int stage_index) {
  if (topics < 2) throw PipelineError("topic count must be at least 2, got " + std::to_string(topics));
  if (topics >= reduced.rows())
    throw PipelineError("topic count " + std::to_string(topics) + " must be below the vocabulary size " +
                        std::to_string(reduced.rows()));
  auto r = run_stage(reduced, topics, fcm, seed, stage_index, observer);
  if (report) *report = summarize(r, topics);
  return std::move(r.membership);
}

TopicModel train(const BuiltCorpus& corpus, const TrainConfig& config, const StageObserver& observer) {
  const auto m = static_cast<Eigen::Index>(corpus.vocabulary.size());
  if (config.topics < 2 || config.topics >= m)
    throw PipelineError("topic count " + std::to_string(config.topics) + " must lie in [2, " +
                        std::to_string(m) + ")");

  TopicModel model;
  model.vocabulary = corpus.vocabulary;
  model.config = config;
  model.doc_ids = corpus.matrix.doc_ids;

  const LocalWeights lw = local_weights(corpus.matrix);
  model.weights = global_weights(config.gtw, lw, config.weighting);
  const WeightedMatrix a = apply_gtw(corpus.matrix, model.weights);

  Eigen::MatrixXd reduced;
  if (config.cascade) {
    reduced = cascade_reduce(a, config.schedule, config.fcm, config.seed, &model.stages, observer);
  } else {
    reduced = Eigen::MatrixXd(a.values);
  }
  const auto final_stage = config.cascade ? config.schedule.cluster_counts.size() : 0;
  StageReport report;
  model.topic_given_word = topic_memberships(reduced, config.topics, config.fcm,
                                             derive_seed(config.seed, final_stage), &report, observer,
                                             static_cast<int>(final_stage));
  model.stages.push_back(report);

  model.word_prob = word_probabilities(a);
  model.word_given_topic = word_given_topic(model.topic_given_word, model.word_prob);
  const SparseMatrix pwd = word_given_doc(a, model.doc_ids);
  model.topic_given_doc = topic_given_doc(model.topic_given_word, pwd);
  return model;
}

TopicModel train(const std::vector<RawDocument>& docs, const TrainConfig& config, const StageObserver& observer) {
  return train(build_matrix(docs, config.tokenizer, config.build), config, observer);
}

Eigen::VectorXd fold_in(const TopicModel& model, const DocumentCounts& counts, const std::string& doc_id) {
  if (counts.terms.empty()) throw OutOfVocabularyError(doc_id);
  double mass = 0.0;
  for (const auto& [i, f] : counts.terms) mass += model.weights.clamped[static_cast<Eigen::Index>(i)] * f;
  Eigen::VectorXd topics = Eigen::VectorXd::Zero(model.topics());
  for (const auto& [i, f] : counts.terms) {
    const auto row = static_cast<Eigen::Index>(i);
    const double p_word = model.weights.clamped[row] * f / mass;
    topics += p_word * model.topic_given_word.row(row).transpose();
  }
  return topics;
}

Eigen::VectorXd fold_in(const TopicModel& model, const RawDocument& doc) {
  return fold_in(model, count_terms(model.vocabulary, tokenize(doc.text, model.config.tokenizer)), doc.id);
}

std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, Eigen::Index topic,
                                                      std::size_t count) {
  if (topic < 0 || topic >= model.topics())
    throw PipelineError("topic " + std::to_string(topic) + " out of range [0, " + std::to_string(model.topics()) +
                        ")");
  const auto row = model.word_given_topic.row(topic);
  std::vector<std::size_t> order(model.vocabulary.size());
  std::iota(order.begin(), order.end(), 0);
  // Vocabulary indices are in lexicographic order, so index breaks ties.
  const auto better = [&](std::size_t x, std::size_t y) {
    const double px = row[static_cast<Eigen::Index>(x)];
    const double py = row[static_cast<Eigen::Index>(y)];
    return px != py ? px > py : x < y;
  };
  const std::size_t k = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r)
    out.emplace_back(model.vocabulary.term(order[r]), row[static_cast<Eigen::Index>(order[r])]);
  return out;
}

}  // namespace flatm
