#pragma once

// Fuzzy c-means: minimizes sum_k sum_j mu_kj^q |x_j - v_k|^2 over row-stochastic
// memberships by alternating the closed-form membership and center updates.
//
// Conventions: data is n x d (one point per row), membership is n x c (one
// point per row, one cluster per column), centers are c x d.

#include "flatm/error.hpp"
#include "flatm/parallel.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace flatm {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct FcmConfig {
  int clusters = 2;
  Scalar fuzzifier = Scalar(2);
  Scalar threshold = Scalar(1e-5);  // bound on max |delta mu| for convergence
  int max_iterations = 100;
  std::uint64_t seed = 0;
};

template <typename Scalar = double>
struct FcmResult {
  Matrix<Scalar> membership;
  Matrix<Scalar> centers;
  std::vector<Scalar> objective_trace;
  std::vector<Scalar> max_delta_trace;
  int iterations = 0;
  bool converged = false;
  int center_resets = 0;
};

// Per-iteration callback: (iteration, objective, max delta mu).
template <typename Scalar>
using FcmObserver = std::function<void(int, Scalar, Scalar)>;

namespace detail {

template <typename Scalar, typename Data, typename Centers>
Scalar distance(const Eigen::MatrixBase<Data>& data, Eigen::Index j, const Eigen::MatrixBase<Centers>& centers,
                Eigen::Index k) {
  return (data.row(j) - centers.row(k)).norm();
}

}  // namespace detail

// Closed-form membership update for fixed centers. A point that coincides with
// one or more centers splits its membership equally among them.
template <typename Data, typename Centers>
Matrix<typename Data::Scalar> update_memberships(const Eigen::MatrixBase<Data>& data,
                                                 const Eigen::MatrixBase<Centers>& centers,
                                                 typename Data::Scalar fuzzifier) {
  using Scalar = typename Data::Scalar;
  const Eigen::Index n = data.rows();
  const Eigen::Index c = centers.rows();
  const Scalar exponent = Scalar(2) / (fuzzifier - Scalar(1));
  Matrix<Scalar> mu(n, c);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    Vector<Scalar> dist(c);
    for (auto jj = begin; jj < end; ++jj) {
      const auto j = static_cast<Eigen::Index>(jj);
      for (Eigen::Index k = 0; k < c; ++k) dist[k] = detail::distance<Scalar>(data, j, centers, k);
      const Scalar dmin = dist.minCoeff();
      if (dmin == Scalar(0)) {
        const auto zeros = (dist.array() == Scalar(0)).count();
        for (Eigen::Index k = 0; k < c; ++k)
          mu(j, k) = dist[k] == Scalar(0) ? Scalar(1) / Scalar(zeros) : Scalar(0);
        continue;
      }
      // (d_min / d_k)^p normalized; equal to 1 / sum_l (d_k / d_l)^p.
      Scalar total = 0;
      for (Eigen::Index k = 0; k < c; ++k) {
        dist[k] = std::pow(dmin / dist[k], exponent);
        total += dist[k];
      }
      for (Eigen::Index k = 0; k < c; ++k) mu(j, k) = dist[k] / total;
    }
  });
  return mu;
}

// Centers as mu^q-weighted means of the points. Returns false in `ok` for a
// cluster with zero total weight; its row is left at zero.
template <typename Data, typename Membership>
Matrix<typename Data::Scalar> update_centers(const Eigen::MatrixBase<Data>& data,
                                             const Eigen::MatrixBase<Membership>& membership,
                                             typename Data::Scalar fuzzifier,
                                             std::vector<bool>* empty_clusters = nullptr) {
  using Scalar = typename Data::Scalar;
  const Eigen::Index c = membership.cols();
  const Matrix<Scalar> weights = membership.array().pow(fuzzifier).matrix();
  Matrix<Scalar> centers = Matrix<Scalar>::Zero(c, data.cols());
  if (empty_clusters) empty_clusters->assign(static_cast<std::size_t>(c), false);

  // One cluster per task: each center is a fixed-order reduction.
  parallel_for(
      static_cast<std::size_t>(c),
      [&](std::size_t begin, std::size_t end) {
        for (auto kk = begin; kk < end; ++kk) {
          const auto k = static_cast<Eigen::Index>(kk);
          const Scalar mass = weights.col(k).sum();
          if (!(mass > Scalar(0))) {
            if (empty_clusters) (*empty_clusters)[kk] = true;
            continue;
          }
          centers.row(k).noalias() = (weights.col(k).transpose() * data) / mass;
        }
      },
      1);
  return centers;
}

template <typename Data, typename Membership, typename Centers>
typename Data::Scalar objective(const Eigen::MatrixBase<Data>& data, const Eigen::MatrixBase<Membership>& membership,
                                const Eigen::MatrixBase<Centers>& centers, typename Data::Scalar fuzzifier) {
  using Scalar = typename Data::Scalar;
  Scalar total = 0;
  for (Eigen::Index j = 0; j < data.rows(); ++j) {
    for (Eigen::Index k = 0; k < centers.rows(); ++k) {
      const Scalar d2 = (data.row(j) - centers.row(k)).squaredNorm();
      total += std::pow(membership(j, k), fuzzifier) * d2;
    }
  }
  return total;
}

// Seeded uniform random memberships, normalized per point.
template <typename Scalar>
Matrix<Scalar> random_memberships(Eigen::Index n, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix<Scalar> mu(n, c);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < c; ++k) mu(j, k) = static_cast<Scalar>(unif(rng)) + Scalar(1e-12);
    mu.row(j) /= mu.row(j).sum();
  }
  return mu;
}

template <typename Data>
FcmResult<typename Data::Scalar> fcm_run(const Eigen::MatrixBase<Data>& data,
                                         const FcmConfig<typename Data::Scalar>& config,
                                         const FcmObserver<typename Data::Scalar>& observer = {}) {
  using Scalar = typename Data::Scalar;
  const Eigen::Index n = data.rows();
  const Eigen::Index c = config.clusters;
  if (c < 2) throw PipelineError("fuzzy c-means needs at least 2 clusters, got " + std::to_string(c));
  if (n <= c)
    throw PipelineError("fuzzy c-means needs more points than clusters (" + std::to_string(n) +
                        " points, " + std::to_string(c) + " clusters)");
  if (!(config.fuzzifier > Scalar(1))) throw PipelineError("fuzzifier must be > 1");
  if (!(config.threshold > Scalar(0))) throw PipelineError("convergence threshold must be > 0");
  if (config.max_iterations < 1) throw PipelineError("max iterations must be >= 1");
  if (!data.allFinite()) throw PipelineError("fuzzy c-means input contains non-finite values");

  FcmResult<Scalar> result;
  result.membership = random_memberships<Scalar>(n, c, config.seed);
  std::mt19937_64 reset_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<bool> empty;

  for (int it = 1; it <= config.max_iterations; ++it) {
    result.centers = update_centers(data, result.membership, config.fuzzifier, &empty);
    for (Eigen::Index k = 0; k < c; ++k) {
      if (!empty[static_cast<std::size_t>(k)]) continue;
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      result.centers.row(k) = data.row(pick(reset_rng));
      ++result.center_resets;
    }
    Matrix<Scalar> next = update_memberships(data, result.centers, config.fuzzifier);
    const Scalar delta = (next - result.membership).cwiseAbs().maxCoeff();
    result.membership = std::move(next);
    const Scalar j_q = objective(data, result.membership, result.centers, config.fuzzifier);
    result.objective_trace.push_back(j_q);
    result.max_delta_trace.push_back(delta);
    result.iterations = it;
    if (observer) observer(it, j_q, delta);
    if (delta <= config.threshold) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace flatm
