// flatm: train fuzzy-clustering topic models, infer document topics, inspect
// topics, run the evaluation protocols and generate synthetic corpora.
//
// Exit codes: 0 success, 1 usage, 2 IO, 3 numerical or pipeline failure.

#include "flatm/corpus.hpp"
#include "flatm/error.hpp"
#include "flatm/eval.hpp"
#include "flatm/format.hpp"
#include "flatm/model.hpp"
#include "flatm/parallel.hpp"
#include "flatm/serialize.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CorpusOptions {
  std::string input;
  std::string format = "auto";
  bool allow_empty = false;
};

struct TrainOptions {
  std::string gtw = "entropy";
  int topics = 10;
  std::uint64_t seed = 0;
  double q = 2.0;
  double threshold = 1e-5;
  int max_iter = 100;
  std::string schedule = flatm::CascadeSchedule{}.to_string();
  bool no_cascade = false;
  double epsilon = flatm::kDefaultClampFloor;
  std::string idf_variant = "total-frequency";
  std::size_t min_df = 1;
  std::string stopwords;
  std::size_t min_token_length = 2;
  bool keep_numeric = false;
  bool no_lowercase = false;
};

struct Globals {
  std::optional<unsigned> threads;
  std::string config;
};

void add_corpus_options(CLI::App* cmd, CorpusOptions& o, bool required = true) {
  auto* in = cmd->add_option("--input", o.input, "Corpus path (directory of .txt, labeled TSV or lines file)");
  if (required) in->required();
  cmd->add_option("--format", o.format, "auto | dir | tsv | lines")->capture_default_str();
  cmd->add_flag("--allow-empty", o.allow_empty, "Accept documents with empty text");
}

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--gtw", o.gtw, "Global weighting: entropy | idf | probidf | normal | gfidf | none")
      ->capture_default_str();
  cmd->add_option("--topics", o.topics, "Number of topics K")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Master random seed")->capture_default_str();
  cmd->add_option("--q", o.q, "FCM fuzzifier (> 1)")->capture_default_str();
  cmd->add_option("--threshold", o.threshold, "FCM convergence bound on max membership change")
      ->capture_default_str();
  cmd->add_option("--max-iter", o.max_iter, "FCM iteration cap per stage")->capture_default_str();
  cmd->add_option("--schedule", o.schedule, "Cascade cluster counts, comma separated")->capture_default_str();
  cmd->add_flag("--no-cascade", o.no_cascade, "Cluster words directly in document space (ablation)");
  cmd->add_option("--epsilon", o.epsilon, "Clamp floor for global weights")->capture_default_str();
  cmd->add_option("--idf-variant", o.idf_variant, "total-frequency | document-frequency")->capture_default_str();
  cmd->add_option("--min-df", o.min_df, "Drop terms in fewer documents")->capture_default_str();
  cmd->add_option("--stopwords", o.stopwords, "Stop-word list file (default: bundled English list)");
  cmd->add_option("--min-token-length", o.min_token_length, "Shortest kept token")->capture_default_str();
  cmd->add_flag("--keep-numeric", o.keep_numeric, "Keep purely numeric tokens");
  cmd->add_flag("--no-lowercase", o.no_lowercase, "Do not lowercase tokens");
}

void add_common(CLI::App* cmd, Globals& g) {
  cmd->add_option("--config", g.config, "JSON file of flag values; command-line flags take precedence");
  cmd->add_option("--threads", g.threads, "Worker threads (default: FLATM_THREADS or all cores)");
}

std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw UsageError("config values must be strings, numbers or booleans, got " + v.dump());
}

// Fills options not given on the command line from the --config file.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw flatm::IoError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "config") continue;
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt) throw UsageError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(config_value(value));
    opt->run_callback();
  }
}

void apply_threads(const Globals& g) {
  if (g.threads) {
    flatm::set_thread_count(*g.threads);
  } else if (const char* env = std::getenv("FLATM_THREADS")) {
    try {
      flatm::set_thread_count(static_cast<unsigned>(std::stoul(env)));
    } catch (const std::exception&) {
      throw UsageError(std::string("FLATM_THREADS is not a number: ") + env);
    }
  }
}

flatm::CorpusFormat resolve_format(const CorpusOptions& o) {
  if (o.format != "auto") return flatm::parse_corpus_format(o.format);
  if (std::filesystem::is_directory(o.input)) return flatm::CorpusFormat::DirOfTxt;
  if (std::filesystem::path(o.input).extension() == ".tsv") return flatm::CorpusFormat::LabeledTsv;
  return flatm::CorpusFormat::Lines;
}

std::vector<flatm::RawDocument> load(const CorpusOptions& o) {
  return flatm::load_corpus(o.input, resolve_format(o), {o.allow_empty});
}

flatm::TrainConfig make_train_config(const TrainOptions& o) {
  flatm::TrainConfig c;
  c.gtw = flatm::parse_gtw(o.gtw);
  c.topics = o.topics;
  c.seed = o.seed;
  c.fcm = {o.q, o.threshold, o.max_iter};
  c.schedule = flatm::CascadeSchedule::parse(o.schedule);
  c.cascade = !o.no_cascade;
  c.weighting = {o.epsilon, flatm::parse_idf_variant(o.idf_variant)};
  c.build.min_df = o.min_df;
  c.tokenizer.lowercase = !o.no_lowercase;
  c.tokenizer.min_token_length = o.min_token_length;
  c.tokenizer.drop_numeric_tokens = !o.keep_numeric;
  if (!o.stopwords.empty()) c.tokenizer.stopwords = flatm::load_stopwords(o.stopwords);
  return c;
}

// Opens `path` for writing, or returns stdout for "" / "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw flatm::IoError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void finish(const std::string& path) {
    stream().flush();
    if (!stream()) throw flatm::IoError("write failed: " + (path.empty() ? std::string("stdout") : path));
  }

 private:
  std::ofstream file_;
};

struct TrainCommand {
  CorpusOptions corpus;
  TrainOptions train;
  std::string output;
  std::string weights_tsv;
  bool verbose = false;

  int run() const {
    const auto start = std::chrono::steady_clock::now();
    const flatm::TrainConfig config = make_train_config(train);
    const auto built = flatm::build_matrix(load(corpus), config.tokenizer, config.build);

    flatm::StageObserver observer;
    if (verbose) {
      observer = [last = -1](int stage, int clusters, int it, double j, double delta) mutable {
        if (stage != last) {
          std::cerr << "# stage " << stage << " clusters " << clusters << '\n';
          last = stage;
        }
        std::cerr << it << '\t' << flatm::format_double(j) << '\t' << flatm::format_double(delta) << '\n';
      };
    }
    const flatm::TopicModel model = flatm::train(built, config, observer);
    flatm::save_model(model, output);
    if (!weights_tsv.empty()) {
      Output w(weights_tsv);
      flatm::write_weights_tsv(w.stream(), model.vocabulary, model.weights);
      w.finish(weights_tsv);
    }

    if (const auto clamped = model.weights.clamped_count())
      std::cerr << "warning: " << clamped << " global weights clamped to epsilon\n";
    for (std::size_t s = 0; s < model.stages.size(); ++s) {
      if (!model.stages[s].converged)
        std::cerr << "warning: FCM stage " << s << " (" << model.stages[s].clusters
                  << " clusters) hit the iteration cap\n";
      if (model.stages[s].center_resets)
        std::cerr << "warning: FCM stage " << s << " reinitialized " << model.stages[s].center_resets
                  << " empty cluster centers\n";
    }

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "documents\t" << built.matrix.n_docs() << '\n'
              << "vocabulary\t" << model.vocabulary.size() << '\n'
              << "topics\t" << model.topics() << '\n'
              << "gtw\t" << flatm::to_string(config.gtw) << '\n';
    for (std::size_t s = 0; s < model.stages.size(); ++s)
      std::cout << "stage " << s << "\tclusters=" << model.stages[s].clusters
                << "\titerations=" << model.stages[s].iterations << '\n';
    const auto mass = model.topic_mass();
    std::cout << "topic_mass_min\t" << flatm::format_double(mass.minCoeff()) << '\n'
              << "topic_mass_max\t" << flatm::format_double(mass.maxCoeff()) << '\n'
              << "wall_seconds\t" << seconds << '\n'
              << "model\t" << output << '\n';
    return kOk;
  }
};

struct InferCommand {
  std::string model_path;
  CorpusOptions corpus;
  std::string output;

  int run() const {
    const flatm::TopicModel model = flatm::load_model(model_path);
    CorpusOptions opts = corpus;
    opts.allow_empty = true;
    const auto docs = load(opts);
    Output out(output);
    auto& os = out.stream();
    os << "doc_id";
    for (Eigen::Index k = 0; k < model.topics(); ++k) os << ",topic_" << k;
    os << '\n';
    std::size_t warnings = 0;
    for (const auto& doc : docs) {
      os << doc.id;
      try {
        const Eigen::VectorXd p = flatm::fold_in(model, doc);
        for (Eigen::Index k = 0; k < p.size(); ++k) os << ',' << flatm::format_double(p[k]);
      } catch (const flatm::OutOfVocabularyError&) {
        os << ",ERROR_OOV";
        ++warnings;
      }
      os << '\n';
    }
    out.finish(output);
    if (warnings) std::cerr << "warning: " << warnings << " out-of-vocabulary documents\n";
    return kOk;
  }
};

struct TopWordsCommand {
  std::string model_path;
  std::size_t k_words = 10;
  std::optional<long> topic;
  std::string output;

  int run() const {
    const flatm::TopicModel model = flatm::load_model(model_path);
    Output out(output);
    auto& os = out.stream();
    os << "topic\trank\tterm\tprob\n";
    const long first = topic ? *topic : 0;
    const long last = topic ? *topic + 1 : static_cast<long>(model.topics());
    for (long k = first; k < last; ++k) {
      const auto words = flatm::top_words(model, k, k_words);
      for (std::size_t r = 0; r < words.size(); ++r)
        os << k << '\t' << r + 1 << '\t' << words[r].first << '\t' << flatm::format_double(words[r].second) << '\n';
    }
    out.finish(output);
    return kOk;
  }
};

struct EvalCommand {
  flatm::Protocol protocol = flatm::Protocol::Classification;
  CorpusOptions corpus;
  TrainOptions train;
  int folds = 5;
  double train_frac = 0.8;
  std::optional<std::uint64_t> split_seed;
  bool no_stratify = false;
  double smoothing = flatm::kDefaultSmoothing;
  std::string report = "json";
  std::string output;
  std::string csv;

  int run() const {
    const flatm::TrainConfig config = make_train_config(train);
    const auto docs = load(corpus);
    const flatm::SplitPlan plan{split_seed.value_or(config.seed), train_frac, folds, !no_stratify};
    const flatm::EvalOptions options{smoothing};
    const flatm::EvalReport r = protocol == flatm::Protocol::Classification
                                    ? flatm::classify(docs, config, plan, options)
                                    : flatm::heldout_loglik(docs, config, plan, options);
    Output out(output);
    if (report == "json")
      out.stream() << flatm::to_json(r).dump(2) << '\n';
    else if (report == "text")
      flatm::write_report_text(out.stream(), r);
    else
      flatm::write_report_csv(out.stream(), r);
    out.finish(output);
    if (!csv.empty()) {
      Output c(csv);
      flatm::write_report_csv(c.stream(), r);
      c.finish(csv);
    }
    return kOk;
  }
};

struct GenSynthCommand {
  flatm::SyntheticSpec spec;
  std::string output;

  int run() const {
    Output out(output);
    flatm::write_labeled_tsv(out.stream(), flatm::generate_synthetic(spec));
    out.finish(output);
    return kOk;
  }
};

void add_eval_subcommand(CLI::App* eval, const std::string& name, EvalCommand& cmd, Globals& g,
                         const std::string& help) {
  auto* sub = eval->add_subcommand(name, help);
  add_corpus_options(sub, cmd.corpus);
  add_train_options(sub, cmd.train);
  add_common(sub, g);
  sub->add_option("--folds", cmd.folds, "1 = single holdout split, >= 2 = k-fold cross-validation")
      ->capture_default_str();
  sub->add_option("--train-frac", cmd.train_frac, "Training share for a holdout split")->capture_default_str();
  sub->add_option("--split-seed", cmd.split_seed, "Seed for the document split (default: --seed)");
  sub->add_flag("--no-stratify", cmd.no_stratify, "Ignore labels when assigning folds");
  sub->add_option("--smoothing", cmd.smoothing, "Added to every token probability")->capture_default_str();
  sub->add_option("--report", cmd.report, "json | text | csv")
      ->check(CLI::IsMember({"json", "text", "csv"}))
      ->capture_default_str();
  sub->add_option("--output", cmd.output, "Report path (default: stdout)");
  sub->add_option("--csv", cmd.csv, "Also write per-fold fold,metric,value CSV here");
}

int fail(int code, const std::string& message) {
  std::cerr << "flatm: " << message << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy-clustering topic models: train, infer, inspect, evaluate"};
  app.require_subcommand(1);
  Globals globals;

  TrainCommand train;
  auto* train_cmd = app.add_subcommand("train", "Train a topic model and write it as JSON");
  add_corpus_options(train_cmd, train.corpus);
  add_train_options(train_cmd, train.train);
  add_common(train_cmd, globals);
  train_cmd->add_option("--output", train.output, "Model file to write")->required();
  train_cmd->add_option("--weights-tsv", train.weights_tsv, "Also write term<TAB>raw<TAB>clamped weights");
  train_cmd->add_flag("--verbose", train.verbose, "Per-iteration FCM diagnostics on stderr");

  InferCommand infer;
  auto* infer_cmd = app.add_subcommand("infer", "Per-document topic distributions as CSV");
  infer_cmd->add_option("--model", infer.model_path, "Model file")->required();
  add_corpus_options(infer_cmd, infer.corpus);
  add_common(infer_cmd, globals);
  infer_cmd->add_option("--output", infer.output, "CSV path (default: stdout)");

  TopWordsCommand top;
  auto* top_cmd = app.add_subcommand("top-words", "Highest-probability words per topic as TSV");
  top_cmd->add_option("--model", top.model_path, "Model file")->required();
  top_cmd->add_option("--k-words", top.k_words, "Words per topic")->capture_default_str();
  top_cmd->add_option("--topic", top.topic, "Only this topic");
  add_common(top_cmd, globals);
  top_cmd->add_option("--output", top.output, "TSV path (default: stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluation protocols");
  eval_cmd->require_subcommand(1);
  EvalCommand classify;
  add_eval_subcommand(eval_cmd, "classify", classify, globals, "Per-class likelihood classification");
  EvalCommand loglik;
  loglik.protocol = flatm::Protocol::LogLikelihood;
  loglik.folds = 1;
  loglik.train_frac = 0.9;
  add_eval_subcommand(eval_cmd, "loglik", loglik, globals, "Held-out log-likelihood");

  GenSynthCommand synth;
  auto* synth_cmd = app.add_subcommand("gen-synth", "Write a seeded synthetic labeled TSV corpus");
  synth_cmd->add_option("--classes", synth.spec.classes)->capture_default_str();
  synth_cmd->add_option("--vocab-per-class", synth.spec.vocab_per_class)->capture_default_str();
  synth_cmd->add_option("--docs-per-class", synth.spec.docs_per_class)->capture_default_str();
  synth_cmd->add_option("--doc-length", synth.spec.doc_length)->capture_default_str();
  synth_cmd->add_option("--overlap", synth.spec.overlap_fraction, "Shared pool size as a fraction of class pool")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed)->capture_default_str();
  synth_cmd->add_option("--output", synth.output, "TSV path (default: stdout)");
  add_common(synth_cmd, globals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "flatm: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (auto* sub : app.get_subcommands()) {
      failed = sub;
      for (auto* inner : sub->get_subcommands()) failed = inner;
    }
    std::cerr << failed->help();
    return kUsage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    if (active == eval_cmd) active = eval_cmd->get_subcommands().front();
    apply_config_file(active, globals.config);
    apply_threads(globals);

    if (active == train_cmd) return train.run();
    if (active == infer_cmd) return infer.run();
    if (active == top_cmd) return top.run();
    if (active->get_name() == "classify") return classify.run();
    if (active->get_name() == "loglik") return loglik.run();
    if (active == synth_cmd) return synth.run();
    return fail(kUsage, "unknown command");
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, e.what());
  } catch (const flatm::IoError& e) {
    return fail(kIo, e.what());
  } catch (const flatm::PipelineError& e) {
    return fail(kNumerical, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kUsage, e.what());
  } catch (const std::out_of_range& e) {
    return fail(kUsage, e.what());
  } catch (const std::exception& e) {
    return fail(kNumerical, e.what());
  }
}
