#pragma once

#include "flatm/corpus.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <ostream>
#include <string_view>

namespace flatm {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Local term weights derived from the raw counts f.
struct LocalWeights {
  SparseMatrix counts;       // f_ij
  SparseMatrix binary;       // b(f_ij) = 1 where f_ij > 0
  SparseMatrix proportions;  // p_ij = f_ij / sum_j f_ij
};

enum class GtwMethod { Entropy, Idf, ProbIdf, Normal, Gfidf, None };

GtwMethod parse_gtw(std::string_view name);
std::string_view to_string(GtwMethod method);

// Which denominator IDF uses. TotalFrequency is log2(n / sum_j f_ij);
// DocumentFrequency is the conventional log2(n / df).
enum class IdfVariant { TotalFrequency, DocumentFrequency };

IdfVariant parse_idf_variant(std::string_view name);
std::string_view to_string(IdfVariant variant);

inline constexpr double kDefaultClampFloor = 1e-6;

// Per-term global weights. `raw` holds the formula value as evaluated
// (ProbIDF for a term in every document is -infinity); `clamped` is
// max(raw, epsilon) and is what scales the count matrix.
struct GlobalWeightVector {
  GtwMethod method = GtwMethod::None;
  Eigen::VectorXd raw;
  Eigen::VectorXd clamped;
  double epsilon = kDefaultClampFloor;

  Eigen::Index size() const { return raw.size(); }
  // Terms whose raw weight fell below epsilon.
  Eigen::Index clamped_count() const;
};

struct WeightingOptions {
  double epsilon = kDefaultClampFloor;
  IdfVariant idf_variant = IdfVariant::TotalFrequency;
};

LocalWeights local_weights(const TermDocMatrix& f);

Eigen::VectorXd term_totals(const SparseMatrix& m);

GlobalWeightVector entropy_weights(const LocalWeights& lw, Eigen::Index n_docs,
                                   double epsilon = kDefaultClampFloor);
GlobalWeightVector idf_weights(const SparseMatrix& counts, Eigen::Index n_docs,
                               double epsilon = kDefaultClampFloor,
                               IdfVariant variant = IdfVariant::TotalFrequency);
GlobalWeightVector probidf_weights(const SparseMatrix& binary, Eigen::Index n_docs,
                                   double epsilon = kDefaultClampFloor);
GlobalWeightVector normal_weights(const SparseMatrix& counts, double epsilon = kDefaultClampFloor);
GlobalWeightVector gfidf_weights(const SparseMatrix& counts, const SparseMatrix& binary,
                                 double epsilon = kDefaultClampFloor);
GlobalWeightVector unit_weights(Eigen::Index n_terms);

GlobalWeightVector global_weights(GtwMethod method, const LocalWeights& lw,
                                  const WeightingOptions& options = {});

struct WeightedMatrix {
  SparseMatrix values;  // a_ij = clamped_i * f_ij
  GtwMethod method = GtwMethod::None;
};

WeightedMatrix apply_gtw(const TermDocMatrix& f, const GlobalWeightVector& g);

// `term<TAB>raw<TAB>clamped` per term, 17 significant digits.
void write_weights_tsv(std::ostream& out, const Vocabulary& vocabulary, const GlobalWeightVector& g);

}  // namespace flatm
