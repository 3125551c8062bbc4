// Runs the flatm executable end to end.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "flatm_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path file(const std::string& name) { return workdir() / name; }

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" FLATM_EXE "' " + args + " >'" +
                          file("stdout").string() + "' 2>'" + file("stderr").string() + "'";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

const fs::path& corpus() {
  static const fs::path p = [] {
    const fs::path out = file("synth.tsv");
    REQUIRE(run("gen-synth --classes 3 --vocab-per-class 15 --docs-per-class 20 --doc-length 30 --overlap 0.2 "
                "--seed 5 --output '" + out.string() + "'") == 0);
    return out;
  }();
  return p;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("gen-synth is seeded and reloadable") {
  const auto& a = corpus();
  REQUIRE(run("gen-synth --classes 3 --vocab-per-class 15 --docs-per-class 20 --doc-length 30 --overlap 0.2 "
              "--seed 5 --output " + q(file("synth2.tsv"))) == 0);
  CHECK(slurp(a) == slurp(file("synth2.tsv")));
  CHECK(lines(slurp(a)).size() == 60);
  REQUIRE(run("gen-synth --classes 3 --docs-per-class 20 --seed 6") == 0);
  CHECK(lines(slurp(file("stdout"))).size() == 60);
  CHECK(run("train --input " + q(a) + " --topics 3 --output " + q(file("reload.json"))) == 0);
}

TEST_CASE("thread count does not change results") {
  REQUIRE(run("train --input " + q(corpus()) + " --topics 4 --seed 3 --threads 1 --output " + q(file("t1.json"))) == 0);
  REQUIRE(run("train --input " + q(corpus()) + " --topics 4 --seed 3 --threads 4 --output " + q(file("t4.json"))) == 0);
  REQUIRE(run("train --input " + q(corpus()) + " --topics 4 --seed 3 --output " + q(file("tenv.json")),
              "FLATM_THREADS=3") == 0);
  CHECK(slurp(file("t1.json")) == slurp(file("t4.json")));
  CHECK(slurp(file("t1.json")) == slurp(file("tenv.json")));

  REQUIRE(run("eval classify --input " + q(corpus()) + " --topics 3 --folds 3 --threads 1 --output " +
              q(file("r1.json"))) == 0);
  REQUIRE(run("eval classify --input " + q(corpus()) + " --topics 3 --folds 3 --threads 4 --output " +
              q(file("r4.json"))) == 0);
  CHECK(slurp(file("r1.json")) == slurp(file("r4.json")));
}

TEST_CASE("config file merges under explicit flags") {
  std::ofstream(file("cfg.json")) << R"({"gtw": "normal", "topics": 5, "seed": 11, "q": 1.8})";
  REQUIRE(run("train --input " + q(corpus()) + " --config " + q(file("cfg.json")) + " --topics 3 --output " +
              q(file("merged.json"))) == 0);
  REQUIRE(run("train --input " + q(corpus()) + " --gtw normal --topics 3 --seed 11 --q 1.8 --output " +
              q(file("flags.json"))) == 0);
  CHECK(slurp(file("merged.json")) == slurp(file("flags.json")));

  std::ofstream(file("bad.json")) << R"({"no-such-flag": 1})";
  CHECK(run("train --input " + q(corpus()) + " --config " + q(file("bad.json")) + " --output " +
            q(file("x.json"))) == 1);
}

TEST_CASE("exit codes") {
  CHECK(run("train --output " + q(file("x.json"))) == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("") == 1);
  CHECK(run("train --input " + q(file("missing.tsv")) + " --output " + q(file("x.json"))) == 2);
  CHECK(run("train --input " + q(corpus()) + " --topics 1000 --output " + q(file("x.json"))) == 3);
  CHECK(run("train --input " + q(corpus()) + " --gtw bogus --output " + q(file("x.json"))) == 1);
  CHECK(run("top-words --model " + q(file("missing.json"))) == 2);
}

TEST_CASE("infer") {
  REQUIRE(run("train --input " + q(corpus()) + " --topics 4 --output " + q(file("m.json"))) == 0);
  REQUIRE(run("infer --model " + q(file("m.json")) + " --input " + q(corpus()) + " --output " + q(file("i.csv"))) == 0);
  const auto rows = lines(slurp(file("i.csv")));
  REQUIRE(rows.size() == 61);
  CHECK(rows[0] == "doc_id,topic_0,topic_1,topic_2,topic_3");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = split(rows[r], ',');
    REQUIRE(cells.size() == 5);
    double sum = 0;
    for (std::size_t c = 1; c < cells.size(); ++c) sum += std::stod(cells[c]);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }

  std::ofstream(file("empty.txt")).close();
  REQUIRE(run("infer --model " + q(file("m.json")) + " --input " + q(file("empty.txt")) + " --format lines") == 0);
  CHECK(slurp(file("stdout")) == "doc_id,topic_0,topic_1,topic_2,topic_3\n");

  std::ofstream(file("oov.txt")) << "unknown words only\nc0w1 c0w2\n";
  REQUIRE(run("infer --model " + q(file("m.json")) + " --input " + q(file("oov.txt"))) == 0);
  const auto oov = lines(slurp(file("stdout")));
  REQUIRE(oov.size() == 3);
  CHECK(oov[1] == "1,ERROR_OOV");
  CHECK(oov[2].rfind("2,", 0) == 0);
}

TEST_CASE("top-words") {
  REQUIRE(run("train --input " + q(corpus()) + " --topics 5 --output " + q(file("tw.json"))) == 0);
  REQUIRE(run("top-words --model " + q(file("tw.json"))) == 0);
  const auto rows = lines(slurp(file("stdout")));
  REQUIRE(rows.size() == 51);
  CHECK(rows[0] == "topic\trank\tterm\tprob");
  REQUIRE(run("top-words --model " + q(file("tw.json")) + " --topic 3 --k-words 4") == 0);
  const auto one = lines(slurp(file("stdout")));
  REQUIRE(one.size() == 5);
  for (std::size_t r = 1; r < one.size(); ++r) {
    const auto cells = split(one[r], '\t');
    REQUIRE(cells.size() == 4);
    CHECK(cells[0] == "3");
    CHECK(cells[1] == std::to_string(r));
  }
  CHECK(run("top-words --model " + q(file("tw.json")) + " --topic 5") != 0);
}

TEST_CASE("weighting choice and held-out evaluation") {
  REQUIRE(run("train --input " + q(corpus()) + " --gtw gfidf --topics 3 --weights-tsv " + q(file("w.tsv")) +
              " --output " + q(file("g.json"))) == 0);
  const auto w = lines(slurp(file("w.tsv")));
  CHECK(w.size() == 48);  // 45 class terms + 3 shared
  REQUIRE(run("eval loglik --input " + q(corpus()) + " --topics 3 --report csv") == 0);
  const auto csv = lines(slurp(file("stdout")));
  REQUIRE(!csv.empty());
  CHECK(csv[0] == "fold,metric,value");
  CHECK(slurp(file("stdout")).find("baseline_loglik") != std::string::npos);
  REQUIRE(run("eval classify --input " + q(corpus()) + " --topics 3 --report text") == 0);
  CHECK(slurp(file("stdout")).find("accuracy") != std::string::npos);
}
