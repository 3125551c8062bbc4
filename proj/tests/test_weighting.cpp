#include "flatm/error.hpp"
#include "flatm/weighting.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace flatm;
using testing::make_matrix;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

}  // namespace

TEST_CASE("local weights: binary indicator and row proportions") {
  const auto lw = local_weights(make_matrix({{2, 0, 2}, {5, 0, 0}, {1, 1, 1}}));
  Eigen::MatrixXd b(3, 3), p(3, 3);
  b << 1, 0, 1, 1, 0, 0, 1, 1, 1;
  p << 0.5, 0, 0.5, 1, 0, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3;
  CHECK(dense(lw.binary) == b);
  CHECK(dense(lw.proportions).isApprox(p, 1e-15));

  const auto uniform = local_weights(make_matrix({{1, 1, 1, 1}}));
  CHECK(dense(uniform.proportions) == Eigen::MatrixXd::Constant(1, 4, 0.25));

  CHECK_THROWS_AS(local_weights(make_matrix({{1, 0}, {0, 0}})), PipelineError);
}

TEST_CASE("entropy weights") {
  const auto two = local_weights(make_matrix({{3, 0}, {1, 1}}));
  const auto g = entropy_weights(two, 2);
  CHECK(g.raw[0] == 1.0);
  CHECK(g.raw[1] == 0.0);
  CHECK(g.clamped[1] == kDefaultClampFloor);

  const auto four = local_weights(make_matrix({{7, 0, 0, 0}}));
  CHECK(entropy_weights(four, 4).raw[0] == 1.0);

  try {
    entropy_weights(local_weights(make_matrix({{1}})), 1);
    FAIL("expected an error");
  } catch (const PipelineError& e) {
    CHECK(std::string(e.what()) == "entropy undefined for single-document corpus");
  }
}

TEST_CASE("idf weights use total frequency by default") {
  const auto f = make_matrix({{1, 1, 0, 0}, {1, 1, 1, 1}, {2, 2, 2, 2}});
  const auto g = idf_weights(f.counts, 4);
  CHECK(g.raw[0] == 1.0);
  CHECK(g.raw[1] == 0.0);
  CHECK(g.raw[2] == -1.0);
  CHECK(g.clamped[1] == kDefaultClampFloor);
  CHECK(g.clamped[2] == kDefaultClampFloor);
  CHECK(g.clamped_count() == 2);

  const auto d = idf_weights(f.counts, 4, kDefaultClampFloor, IdfVariant::DocumentFrequency);
  CHECK(d.raw[0] == 1.0);
  CHECK(d.raw[2] == 0.0);
}

TEST_CASE("probidf weights") {
  const auto f = make_matrix({{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 1, 1, 1}});
  const auto lw = local_weights(f);
  const auto g = probidf_weights(lw.binary, 4);
  CHECK(g.raw[0] == doctest::Approx(std::log2(3.0)).epsilon(1e-15));
  CHECK(g.raw[1] == 0.0);
  CHECK(std::isinf(g.raw[2]));
  CHECK(g.raw[2] < 0);
  CHECK(g.clamped[1] == kDefaultClampFloor);
  CHECK(g.clamped[2] == kDefaultClampFloor);
}

TEST_CASE("normal weights") {
  const auto g = normal_weights(make_matrix({{3, 4}, {1, 0}, {1, 1}}).counts);
  CHECK(g.raw[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(g.raw[1] == 1.0);
  CHECK(g.raw[2] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(normal_weights(make_matrix({{1, 1, 1, 1}}).counts).raw[0] == 0.5);
  CHECK(g.clamped_count() == 0);
}

TEST_CASE("gfidf weights") {
  const auto f = make_matrix({{2, 2, 2, 0}, {1, 0, 0, 0}, {1, 1, 1, 1}});
  const auto lw = local_weights(f);
  const auto g = gfidf_weights(lw.counts, lw.binary);
  CHECK(g.raw[0] == 2.0);
  CHECK(g.raw[1] == 1.0);
  CHECK(g.raw[2] == 1.0);
}

TEST_CASE("apply_gtw scales rows and keeps sparsity") {
  const auto f = make_matrix({{1, 0}, {1, 2}});
  GlobalWeightVector g;
  g.method = GtwMethod::Idf;
  g.raw = g.clamped = Eigen::Vector2d(1.0, 0.5);
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0, 0.5, 1;
  const auto a = apply_gtw(f, g);
  CHECK(dense(a.values) == expected);
  CHECK(a.values.nonZeros() == f.counts.nonZeros());

  const auto none = apply_gtw(f, unit_weights(2));
  CHECK(dense(none.values) == dense(f.counts));
  CHECK(none.method == GtwMethod::None);

  g.clamped = Eigen::Vector2d::Constant(kDefaultClampFloor);
  CHECK(dense(apply_gtw(f, g).values).isApprox(kDefaultClampFloor * dense(f.counts)));

  g.clamped = Eigen::Vector3d::Ones();
  CHECK_THROWS_AS(apply_gtw(f, g), PipelineError);
}

TEST_CASE("weighting properties on random matrices") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim_m(1, 8), dim_n(2, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = dim_m(rng), n = dim_n(rng);
    const auto rows = oracle::random_counts(rng, m, n);
    const auto f = make_matrix(rows);
    const auto lw = local_weights(f);
    const auto e = entropy_weights(lw, n);
    const auto gf = gfidf_weights(lw.counts, lw.binary);
    const auto nr = normal_weights(lw.counts);
    CHECK((e.raw.array() >= -1e-15).all());
    CHECK((e.raw.array() <= 1 + 1e-15).all());
    CHECK((gf.raw.array() >= 1).all());
    // Mean count per containing document: bounded by the largest single count.
    for (Eigen::Index i = 0; i < m; ++i)
      CHECK(gf.raw[i] <= *std::max_element(rows[static_cast<std::size_t>(i)].begin(), rows[static_cast<std::size_t>(i)].end()));
    CHECK((nr.raw.array() > 0).all());
    for (const auto& g : {e, gf, nr, idf_weights(lw.counts, n), probidf_weights(lw.binary, n)})
      CHECK((g.clamped.array() >= g.epsilon).all());

    // Column permutation leaves every weight unchanged.
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto shuffled = rows;
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (int j = 0; j < n; ++j) shuffled[i][static_cast<std::size_t>(j)] = rows[i][static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
    const auto lw2 = local_weights(make_matrix(shuffled));
    for (auto method : {GtwMethod::Entropy, GtwMethod::Idf, GtwMethod::ProbIdf, GtwMethod::Normal, GtwMethod::Gfidf}) {
      const auto a = global_weights(method, lw, {});
      const auto b = global_weights(method, lw2, {});
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::isinf(a.raw[i]))
          CHECK(a.raw[i] == b.raw[i]);
        else
          CHECK(a.raw[i] == doctest::Approx(b.raw[i]).epsilon(1e-12));
      }
    }

    const auto a = apply_gtw(f, e);
    CHECK(a.values.nonZeros() == f.counts.nonZeros());
  }
}

TEST_CASE("gfidf can exceed the document count") {
  const auto lw = local_weights(make_matrix({{4, 0}, {1, 1}}));
  CHECK(gfidf_weights(lw.counts, lw.binary).raw[0] == 4.0);
}

TEST_CASE("a term seen once in one document gets weight 1 from entropy, normal and gfidf") {
  const auto f = make_matrix({{1, 0, 0}, {2, 3, 1}});
  const auto lw = local_weights(f);
  CHECK(entropy_weights(lw, 3).raw[0] == 1.0);
  CHECK(normal_weights(lw.counts).raw[0] == 1.0);
  CHECK(gfidf_weights(lw.counts, lw.binary).raw[0] == 1.0);
}

TEST_CASE("weights TSV export") {
  GlobalWeightVector g = probidf_weights(local_weights(make_matrix({{1, 1}, {1, 0}})).binary, 2);
  std::ostringstream out;
  write_weights_tsv(out, Vocabulary({"common", "rare"}), g);
  CHECK(out.str() == "common\t-inf\t9.9999999999999995e-07\nrare\t0\t9.9999999999999995e-07\n");
}
