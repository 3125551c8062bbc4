#include "flatm/weighting.hpp"

#include "flatm/error.hpp"
#include "flatm/format.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace flatm {
namespace {

GlobalWeightVector finish(GtwMethod method, Eigen::VectorXd raw, double epsilon) {
  if (!(epsilon > 0.0)) throw PipelineError("clamp floor epsilon must be positive");
  GlobalWeightVector g;
  g.method = method;
  g.epsilon = epsilon;
  g.clamped = raw.unaryExpr([epsilon](double v) { return v > epsilon ? v : epsilon; });
  g.raw = std::move(raw);
  return g;
}

void require_occurring_terms(const Eigen::VectorXd& totals, const char* what) {
  for (Eigen::Index i = 0; i < totals.size(); ++i) {
    if (!(totals[i] > 0.0))
      throw PipelineError(std::string(what) + ": term " + std::to_string(i) + " never occurs");
  }
}

}  // namespace

GtwMethod parse_gtw(std::string_view name) {
  if (name == "entropy") return GtwMethod::Entropy;
  if (name == "idf") return GtwMethod::Idf;
  if (name == "probidf") return GtwMethod::ProbIdf;
  if (name == "normal") return GtwMethod::Normal;
  if (name == "gfidf") return GtwMethod::Gfidf;
  if (name == "none") return GtwMethod::None;
  throw std::invalid_argument("unknown global weighting: " + std::string(name));
}

std::string_view to_string(GtwMethod method) {
  switch (method) {
    case GtwMethod::Entropy: return "entropy";
    case GtwMethod::Idf: return "idf";
    case GtwMethod::ProbIdf: return "probidf";
    case GtwMethod::Normal: return "normal";
    case GtwMethod::Gfidf: return "gfidf";
    case GtwMethod::None: return "none";
  }
  return "unknown";
}

IdfVariant parse_idf_variant(std::string_view name) {
  if (name == "total-frequency") return IdfVariant::TotalFrequency;
  if (name == "document-frequency") return IdfVariant::DocumentFrequency;
  throw std::invalid_argument("unknown idf variant: " + std::string(name));
}

std::string_view to_string(IdfVariant variant) {
  return variant == IdfVariant::TotalFrequency ? "total-frequency" : "document-frequency";
}

Eigen::Index GlobalWeightVector::clamped_count() const {
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) k += raw[i] < epsilon ? 1 : 0;
  return k;
}

Eigen::VectorXd term_totals(const SparseMatrix& m) {
  Eigen::VectorXd totals = Eigen::VectorXd::Zero(m.rows());
  for (Eigen::Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) totals[it.row()] += it.value();
  return totals;
}

LocalWeights local_weights(const TermDocMatrix& f) {
  LocalWeights lw;
  lw.counts = f.counts;
  lw.counts.makeCompressed();
  const Eigen::VectorXd totals = term_totals(lw.counts);
  require_occurring_terms(totals, "local weights");

  lw.binary = lw.counts;
  lw.proportions = lw.counts;
  for (Eigen::Index j = 0; j < lw.counts.outerSize(); ++j) {
    SparseMatrix::InnerIterator b(lw.binary, j);
    SparseMatrix::InnerIterator p(lw.proportions, j);
    for (; b; ++b, ++p) {
      b.valueRef() = 1.0;
      p.valueRef() = p.value() / totals[p.row()];
    }
  }
  return lw;
}

GlobalWeightVector entropy_weights(const LocalWeights& lw, Eigen::Index n_docs, double epsilon) {
  if (n_docs < 2) throw PipelineError("entropy undefined for single-document corpus");
  const double log_n = std::log2(static_cast<double>(n_docs));
  Eigen::VectorXd plogp = Eigen::VectorXd::Zero(lw.proportions.rows());
  for (Eigen::Index j = 0; j < lw.proportions.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(lw.proportions, j); it; ++it) {
      // Stored entries are positive, so 0 log 0 terms never appear.
      plogp[it.row()] += it.value() * std::log2(it.value());
    }
  }
  Eigen::VectorXd raw = (plogp.array() / log_n + 1.0).matrix();
  return finish(GtwMethod::Entropy, std::move(raw), epsilon);
}

GlobalWeightVector idf_weights(const SparseMatrix& counts, Eigen::Index n_docs, double epsilon,
                               IdfVariant variant) {
  Eigen::VectorXd denom = term_totals(counts);
  if (variant == IdfVariant::DocumentFrequency) {
    denom.setZero();
    for (Eigen::Index j = 0; j < counts.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(counts, j); it; ++it) denom[it.row()] += 1.0;
  }
  require_occurring_terms(denom, "idf");
  const double n = static_cast<double>(n_docs);
  Eigen::VectorXd raw = denom.unaryExpr([n](double d) { return std::log2(n / d); });
  return finish(GtwMethod::Idf, std::move(raw), epsilon);
}

GlobalWeightVector probidf_weights(const SparseMatrix& binary, Eigen::Index n_docs, double epsilon) {
  const Eigen::VectorXd df = term_totals(binary);
  require_occurring_terms(df, "probidf");
  const double n = static_cast<double>(n_docs);
  Eigen::VectorXd raw = df.unaryExpr([n](double d) {
    // log2(0 / d) for a term present in every document.
    if (n - d <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log2((n - d) / d);
  });
  return finish(GtwMethod::ProbIdf, std::move(raw), epsilon);
}

GlobalWeightVector normal_weights(const SparseMatrix& counts, double epsilon) {
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(counts.rows());
  for (Eigen::Index j = 0; j < counts.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(counts, j); it; ++it) sq[it.row()] += it.value() * it.value();
  require_occurring_terms(sq, "normal");
  Eigen::VectorXd raw = sq.unaryExpr([](double s) { return 1.0 / std::sqrt(s); });
  return finish(GtwMethod::Normal, std::move(raw), epsilon);
}

GlobalWeightVector gfidf_weights(const SparseMatrix& counts, const SparseMatrix& binary, double epsilon) {
  const Eigen::VectorXd total = term_totals(counts);
  const Eigen::VectorXd df = term_totals(binary);
  require_occurring_terms(df, "gfidf");
  Eigen::VectorXd raw = total.cwiseQuotient(df);
  return finish(GtwMethod::Gfidf, std::move(raw), epsilon);
}

GlobalWeightVector unit_weights(Eigen::Index n_terms) {
  return finish(GtwMethod::None, Eigen::VectorXd::Ones(n_terms), kDefaultClampFloor);
}

GlobalWeightVector global_weights(GtwMethod method, const LocalWeights& lw, const WeightingOptions& options) {
  const Eigen::Index n = lw.counts.cols();
  switch (method) {
    case GtwMethod::Entropy: return entropy_weights(lw, n, options.epsilon);
    case GtwMethod::Idf: return idf_weights(lw.counts, n, options.epsilon, options.idf_variant);
    case GtwMethod::ProbIdf: return probidf_weights(lw.binary, n, options.epsilon);
    case GtwMethod::Normal: return normal_weights(lw.counts, options.epsilon);
    case GtwMethod::Gfidf: return gfidf_weights(lw.counts, lw.binary, options.epsilon);
    case GtwMethod::None: {
      auto g = unit_weights(lw.counts.rows());
      g.epsilon = options.epsilon;
      return g;
    }
  }
  throw PipelineError("unhandled weighting method");
}

WeightedMatrix apply_gtw(const TermDocMatrix& f, const GlobalWeightVector& g) {
  if (g.clamped.size() != f.n_terms())
    throw PipelineError("weight vector has " + std::to_string(g.clamped.size()) + " terms, matrix has " +
                        std::to_string(f.n_terms()));
  WeightedMatrix a{f.counts, g.method};
  a.values.makeCompressed();
  if (g.method == GtwMethod::None) return a;
  for (Eigen::Index j = 0; j < a.values.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(a.values, j); it; ++it) it.valueRef() *= g.clamped[it.row()];
  return a;
}

void write_weights_tsv(std::ostream& out, const Vocabulary& vocabulary, const GlobalWeightVector& g) {
  if (static_cast<Eigen::Index>(vocabulary.size()) != g.size())
    throw PipelineError("vocabulary and weight vector sizes differ");
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    out << vocabulary.term(static_cast<std::size_t>(i)) << '\t' << format_double(g.raw[i]) << '\t'
        << format_double(g.clamped[i]) << '\n';
  }
}

}  // namespace flatm
