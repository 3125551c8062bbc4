#pragma once

// Probability assembly from word memberships and the weighted matrix:
//   P(W_i)        = sum_j a_ij / sum_ij a_ij
//   P(W_i, T_k)   = P(T_k | W_i) P(W_i), normalized per topic -> P(W_i | T_k)
//   P(W_i | D_j)  = a_ij / sum_i a_ij
//   P(T_k | D_j)  = sum_i P(T_k | W_i) P(W_i | D_j)

#include "flatm/error.hpp"
#include "flatm/weighting.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace flatm {

inline Eigen::VectorXd word_probabilities(const WeightedMatrix& a) {
  const Eigen::VectorXd mass = term_totals(a.values);
  const double total = mass.sum();
  if (!(total > 0.0)) throw PipelineError("weighted matrix has zero total mass");
  return mass / total;
}

// ptw is m x K (rows are words), pw has length m. Returns K x m.
template <typename Ptw, typename Pw>
Eigen::Matrix<typename Ptw::Scalar, Eigen::Dynamic, Eigen::Dynamic> word_given_topic(
    const Eigen::MatrixBase<Ptw>& ptw, const Eigen::MatrixBase<Pw>& pw,
    Eigen::Matrix<typename Ptw::Scalar, Eigen::Dynamic, 1>* topic_mass = nullptr) {
  using Scalar = typename Ptw::Scalar;
  if (ptw.rows() != pw.size()) throw PipelineError("P(T|W) and P(W) disagree on vocabulary size");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> joint =
      (ptw.array().colwise() * pw.array()).matrix().transpose();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mass = joint.rowwise().sum();
  for (Eigen::Index k = 0; k < joint.rows(); ++k) {
    if (!(mass[k] > Scalar(0))) throw PipelineError("empty topic " + std::to_string(k));
    joint.row(k) /= mass[k];
  }
  if (topic_mass) *topic_mass = mass;
  return joint;
}

// Column-normalized weighted matrix (m x n, sparse).
inline SparseMatrix word_given_doc(const WeightedMatrix& a, const std::vector<std::string>& doc_ids = {}) {
  SparseMatrix out = a.values;
  out.makeCompressed();
  for (Eigen::Index j = 0; j < out.outerSize(); ++j) {
    double mass = 0.0;
    for (SparseMatrix::InnerIterator it(out, j); it; ++it) mass += it.value();
    if (!(mass > 0.0)) {
      const std::string name = static_cast<std::size_t>(j) < doc_ids.size() ? doc_ids[static_cast<std::size_t>(j)]
                                                                              : std::to_string(j);
      throw PipelineError("document '" + name + "' has no weighted mass (empty after tokenization)");
    }
    for (SparseMatrix::InnerIterator it(out, j); it; ++it) it.valueRef() /= mass;
  }
  return out;
}

// ptw is m x K, pwd is m x n (dense or sparse). Returns K x n.
template <typename Ptw, typename Pwd>
Eigen::Matrix<typename Ptw::Scalar, Eigen::Dynamic, Eigen::Dynamic> topic_given_doc(
    const Eigen::MatrixBase<Ptw>& ptw, const Pwd& pwd) {
  if (ptw.rows() != pwd.rows()) throw PipelineError("P(T|W) and P(W|D) disagree on vocabulary size");
  return ptw.transpose() * pwd;
}

}  // namespace flatm
