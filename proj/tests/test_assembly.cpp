#include "flatm/assembly.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace flatm;
using testing::make_matrix;

namespace {

WeightedMatrix weighted(const std::vector<std::vector<double>>& rows) {
  return {make_matrix(rows).counts, GtwMethod::None};
}

}  // namespace

TEST_CASE("word probabilities") {
  const Eigen::VectorXd p = word_probabilities(weighted({{1, 0}, {1, 2}}));
  CHECK(p[0] == 0.25);
  CHECK(p[1] == 0.75);

  const Eigen::VectorXd u = word_probabilities(weighted({{1, 1}, {1, 1}, {1, 1}, {1, 1}}));
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(u[i] == 0.25);

  CHECK(word_probabilities(weighted({{3, 5}}))[0] == 1.0);
  CHECK_THROWS_AS(word_probabilities(WeightedMatrix{SparseMatrix(2, 2), GtwMethod::None}), PipelineError);
}

TEST_CASE("word given topic") {
  Eigen::MatrixXd ptw(2, 2);
  ptw << 1, 0, 0, 1;
  const Eigen::MatrixXd pwt = word_given_topic(ptw, Eigen::Vector2d(0.5, 0.5));
  CHECK(pwt == Eigen::Matrix2d::Identity());

  // A single all-ones topic reduces to P(W).
  const Eigen::Vector3d pw(0.2, 0.3, 0.5);
  const Eigen::MatrixXd one = word_given_topic(Eigen::MatrixXd::Ones(3, 1), pw);
  CHECK(one.transpose().isApprox(pw, 1e-15));

  std::mt19937_64 rng(2);
  const auto ptw_r = oracle::random_stochastic_rows(rng, 7, 3);
  Eigen::VectorXd pw_r = Eigen::VectorXd::Random(7).cwiseAbs() + Eigen::VectorXd::Constant(7, 0.1);
  pw_r /= pw_r.sum();
  Eigen::VectorXd mass;
  const Eigen::MatrixXd rows = word_given_topic(ptw_r, pw_r, &mass);
  CHECK((rows.rowwise().sum().array() - 1).abs().maxCoeff() < 1e-12);
  CHECK(mass.sum() == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd dead(2, 2);
  dead << 1, 0, 1, 0;
  CHECK_THROWS_AS(word_given_topic(dead, Eigen::Vector2d(0.5, 0.5)), PipelineError);
}

TEST_CASE("word given document") {
  const auto a = weighted({{1, 2}, {3, 0}});
  const Eigen::MatrixXd pwd = Eigen::MatrixXd(word_given_doc(a));
  CHECK(pwd(0, 0) == 0.25);
  CHECK(pwd(1, 0) == 0.75);
  CHECK(pwd(0, 1) == 1.0);
  CHECK(pwd(1, 1) == 0.0);

  try {
    word_given_doc(weighted({{1, 0}}), {"kept", "blank"});
    FAIL("expected an error");
  } catch (const PipelineError& e) {
    CHECK(std::string(e.what()).find("'blank'") != std::string::npos);
  }
}

TEST_CASE("topic given document") {
  Eigen::MatrixXd ptw(2, 2);
  ptw << 1, 0, 0, 1;
  Eigen::MatrixXd pwd(2, 1);
  pwd << 0.25, 0.75;
  const Eigen::MatrixXd ptd = topic_given_doc(ptw, pwd);
  CHECK(ptd(0, 0) == 0.25);
  CHECK(ptd(1, 0) == 0.75);

  // Identical rows in P(T|W) give that row to every document.
  Eigen::MatrixXd same(3, 2);
  same << 0.7, 0.3, 0.7, 0.3, 0.7, 0.3;
  Eigen::MatrixXd docs(3, 2);
  docs << 0.2, 0.5, 0.3, 0.5, 0.5, 0.0;
  const Eigen::MatrixXd mixed = topic_given_doc(same, docs);
  CHECK(mixed.col(0).isApprox(Eigen::Vector2d(0.7, 0.3), 1e-15));
  CHECK(mixed.col(1).isApprox(Eigen::Vector2d(0.7, 0.3), 1e-15));

  CHECK(topic_given_doc(Eigen::MatrixXd::Ones(3, 1), docs) .isApprox(Eigen::MatrixXd::Ones(1, 2), 1e-15));
}

TEST_CASE("topic given document matches the triple loop on random inputs") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> dim(1, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = dim(rng), k = 1 + dim(rng) % 4, n = dim(rng);
    const auto ptw = oracle::random_stochastic_rows(rng, m, k);
    const Eigen::MatrixXd pwd = oracle::random_stochastic_rows(rng, n, m).transpose();
    const Eigen::MatrixXd got = topic_given_doc(ptw, pwd);
    CHECK((got - oracle::topic_given_doc(ptw, pwd)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((got.colwise().sum().array() - 1).abs().maxCoeff() <= 1e-12);
    // Sparse P(W|D) gives the same answer.
    const SparseMatrix sparse = pwd.sparseView();
    CHECK((topic_given_doc(ptw, sparse) - got).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("relabeling topics permutes P(W|T) and P(T|D) rows identically") {
  std::mt19937_64 rng(13);
  const auto ptw = oracle::random_stochastic_rows(rng, 6, 3);
  Eigen::VectorXd pw = Eigen::VectorXd::Constant(6, 1.0 / 6);
  const Eigen::MatrixXd pwd = oracle::random_stochastic_rows(rng, 4, 6).transpose();
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
  perm.indices() << 2, 0, 1;
  const Eigen::MatrixXd relabeled = ptw * perm;
  CHECK((word_given_topic(relabeled, pw) - perm.transpose() * word_given_topic(ptw, pw)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((topic_given_doc(relabeled, pwd) - perm.transpose() * topic_given_doc(ptw, pwd)).cwiseAbs().maxCoeff() < 1e-15);
}
