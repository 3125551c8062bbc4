#include "flatm/serialize.hpp"

#include "flatm/error.hpp"
#include "flatm/format.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace flatm {

using nlohmann::json;

json to_json(const TrainConfig& c) {
  json j;
  j["gtw"] = std::string(to_string(c.gtw));
  j["topics"] = c.topics;
  j["seed"] = c.seed;
  j["schedule"] = c.schedule.to_string();
  j["cascade"] = c.cascade;
  j["q"] = c.fcm.fuzzifier;
  j["threshold"] = c.fcm.threshold;
  j["max-iter"] = c.fcm.max_iterations;
  j["epsilon"] = c.weighting.epsilon;
  j["idf-variant"] = std::string(to_string(c.weighting.idf_variant));
  j["min-df"] = c.build.min_df;
  j["lowercase"] = c.tokenizer.lowercase;
  j["min-token-length"] = c.tokenizer.min_token_length;
  j["drop-numeric"] = c.tokenizer.drop_numeric_tokens;
  j["stopwords"] = std::vector<std::string>(c.tokenizer.stopwords.begin(), c.tokenizer.stopwords.end());
  return j;
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw std::invalid_argument("training config must be a JSON object");
  if (j.contains("gtw")) c.gtw = parse_gtw(j.at("gtw").get<std::string>());
  if (j.contains("topics")) c.topics = j.at("topics").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("schedule")) c.schedule = CascadeSchedule::parse(j.at("schedule").get<std::string>());
  if (j.contains("cascade")) c.cascade = j.at("cascade").get<bool>();
  if (j.contains("q")) c.fcm.fuzzifier = j.at("q").get<double>();
  if (j.contains("threshold")) c.fcm.threshold = j.at("threshold").get<double>();
  if (j.contains("max-iter")) c.fcm.max_iterations = j.at("max-iter").get<int>();
  if (j.contains("epsilon")) c.weighting.epsilon = j.at("epsilon").get<double>();
  if (j.contains("idf-variant")) c.weighting.idf_variant = parse_idf_variant(j.at("idf-variant").get<std::string>());
  if (j.contains("min-df")) c.build.min_df = j.at("min-df").get<std::size_t>();
  if (j.contains("lowercase")) c.tokenizer.lowercase = j.at("lowercase").get<bool>();
  if (j.contains("min-token-length")) c.tokenizer.min_token_length = j.at("min-token-length").get<std::size_t>();
  if (j.contains("drop-numeric")) c.tokenizer.drop_numeric_tokens = j.at("drop-numeric").get<bool>();
  if (j.contains("stopwords")) {
    c.tokenizer.stopwords.clear();
    for (const auto& w : j.at("stopwords")) c.tokenizer.stopwords.insert(w.get<std::string>());
  }
  return c;
}

namespace {

std::string quoted(const std::string& s) { return json(s).dump(); }

template <typename Vec>
void write_numbers(std::ostream& out, const Vec& v) {
  out << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    const double x = v[i];
    // JSON has no infinity literal.
    if (std::isfinite(x))
      out << format_double(x);
    else
      out << quoted(format_double(x));
  }
  out << ']';
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor rm = m;
  out << "{\"rows\": " << m.rows() << ", \"cols\": " << m.cols() << ", \"data\": ";
  write_numbers(out, Eigen::Map<const Eigen::VectorXd>(rm.data(), rm.size()));
  out << '}';
}

void write_strings(std::ostream& out, const std::vector<std::string>& v) {
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << quoted(v[i]);
  out << ']';
}

double number(const json& v) {
  if (v.is_string()) return parse_double(v.get<std::string>());
  return v.get<double>();
}

Eigen::VectorXd read_vector(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(arr[i]);
  return v;
}

Eigen::MatrixXd read_matrix(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw IoError("model matrix has wrong element count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(data[static_cast<std::size_t>(r * cols + c)]);
  return m;
}

}  // namespace

std::string serialize_model(const TopicModel& model) {
  std::ostringstream out;
  out << "{\n\"version\": " << kModelFormatVersion << ",\n";
  out << "\"config\": " << to_json(model.config).dump() << ",\n";
  out << "\"vocabulary\": ";
  write_strings(out, model.vocabulary.terms());
  out << ",\n\"word_prob\": ";
  write_numbers(out, model.word_prob);
  out << ",\n\"topic_given_word\": ";
  write_matrix(out, model.topic_given_word);
  out << ",\n\"word_given_topic\": ";
  write_matrix(out, model.word_given_topic);
  out << ",\n\"topic_given_doc\": ";
  write_matrix(out, model.topic_given_doc);
  out << ",\n\"doc_ids\": ";
  write_strings(out, model.doc_ids);
  out << ",\n\"global_weights\": {\"method\": " << quoted(std::string(to_string(model.weights.method)))
      << ", \"epsilon\": " << format_double(model.weights.epsilon) << ", \"raw\": ";
  write_numbers(out, model.weights.raw);
  out << ", \"clamped\": ";
  write_numbers(out, model.weights.clamped);
  out << "},\n\"stages\": [";
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    const auto& st = model.stages[s];
    out << (s ? ", " : "") << "{\"clusters\": " << st.clusters << ", \"iterations\": " << st.iterations
        << ", \"converged\": " << (st.converged ? "true" : "false")
        << ", \"objective\": " << format_double(st.objective) << ", \"center_resets\": " << st.center_resets << '}';
  }
  out << "]\n}\n";
  return out.str();
}

TopicModel deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw IoError("unsupported model version " + j.at("version").dump());
    TopicModel m;
    m.config = train_config_from_json(j.at("config"));
    m.vocabulary = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    m.word_prob = read_vector(j.at("word_prob"));
    m.topic_given_word = read_matrix(j.at("topic_given_word"));
    m.word_given_topic = read_matrix(j.at("word_given_topic"));
    m.topic_given_doc = read_matrix(j.at("topic_given_doc"));
    m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    const auto& g = j.at("global_weights");
    m.weights.method = parse_gtw(g.at("method").get<std::string>());
    m.weights.epsilon = number(g.at("epsilon"));
    m.weights.raw = read_vector(g.at("raw"));
    m.weights.clamped = read_vector(g.at("clamped"));
    for (const auto& st : j.at("stages")) {
      m.stages.push_back({st.at("clusters").get<int>(), st.at("iterations").get<int>(),
                          st.at("converged").get<bool>(), number(st.at("objective")),
                          st.at("center_resets").get<int>()});
    }
    const auto words = static_cast<Eigen::Index>(m.vocabulary.size());
    if (m.vocabulary.size() != j.at("vocabulary").size())
      throw IoError("model vocabulary has duplicate or unsorted terms");
    if (m.word_prob.size() != words || m.topic_given_word.rows() != words || m.word_given_topic.cols() != words ||
        m.weights.raw.size() != words || m.weights.clamped.size() != words ||
        m.word_given_topic.rows() != m.topic_given_word.cols() || m.topic_given_doc.rows() != m.topics() ||
        m.topic_given_doc.cols() != static_cast<Eigen::Index>(m.doc_ids.size()))
      throw IoError("model matrices have inconsistent dimensions");
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TopicModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw IoError("write failed: " + path.string());
}

TopicModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return deserialize_model(text.str());
}

}  // namespace flatm
