#pragma once

#include "ccse/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ccse {

enum class LossType { kSymmetric, kAsymmetricCode, kAsymmetricDoc };

inline std::string to_string(LossType t) {
  switch (t) {
    case LossType::kSymmetric: return "symmetric";
    case LossType::kAsymmetricCode: return "asymmetric_code";
    case LossType::kAsymmetricDoc: return "asymmetric_doc";
  }
  throw std::logic_error("bad loss type");
}

inline LossType loss_type_from_string(const std::string& s) {
  if (s == "symmetric") return LossType::kSymmetric;
  if (s == "asymmetric_code") return LossType::kAsymmetricCode;
  if (s == "asymmetric_doc") return LossType::kAsymmetricDoc;
  throw std::invalid_argument("unknown loss type: " + s +
                              " (expected symmetric, asymmetric_code or asymmetric_doc)");
}

// diagonal: the matched column is the cross-entropy target for each row.
// uniform: the per-row loss is averaged over every column, i.e. cross entropy
// against a uniform target that ignores which pair is matched.
enum class PositiveMode { kDiagonal, kUniform };

inline std::string to_string(PositiveMode m) {
  switch (m) {
    case PositiveMode::kDiagonal: return "diagonal";
    case PositiveMode::kUniform: return "uniform";
  }
  throw std::logic_error("bad positive mode");
}

inline PositiveMode positive_mode_from_string(const std::string& s) {
  if (s == "diagonal") return PositiveMode::kDiagonal;
  if (s == "uniform") return PositiveMode::kUniform;
  throw std::invalid_argument("unknown positive mode: " + s + " (expected diagonal or uniform)");
}

struct LossConfig {
  LossType loss_type = LossType::kSymmetric;
  PositiveMode positive_mode = PositiveMode::kDiagonal;
  double temperature = 1.0;
};

namespace detail {

template <typename Scalar>
void check_unit_rows(const Matrix<Scalar>& m, const char* what) {
  for (Index i = 0; i < m.rows(); ++i) {
    if (std::abs(static_cast<double>(m.row(i).norm()) - 1.0) > 1e-3) {
      throw std::invalid_argument(std::string("unnormalized input: ") + what + " row " +
                                  std::to_string(i));
    }
  }
}

template <typename Scalar>
Scalar log_sum_exp(const Eigen::Ref<const Vector<Scalar>>& v) {
  const Scalar peak = v.maxCoeff();
  Scalar acc = 0;
  for (Index i = 0; i < v.size(); ++i) acc += std::exp(v(i) - peak);
  return peak + std::log(acc);
}

}  // namespace detail

// S_ij = <c_i, d_j> / tau; inner products equal cosines on unit rows.
template <typename Scalar>
Matrix<Scalar> similarity_matrix(const Matrix<Scalar>& code, const Matrix<Scalar>& docs, Scalar tau) {
  if (code.cols() != docs.cols()) throw std::invalid_argument("embedding dimension mismatch");
  if (!(tau > Scalar(0))) throw std::invalid_argument("temperature must be positive");
  detail::check_unit_rows(code, "code");
  detail::check_unit_rows(docs, "docs");
  return (code * docs.transpose()) / tau;
}

template <typename Scalar>
struct LossBreakdown {
  Vector<Scalar> code_losses;  // one entry per row of S
  Vector<Scalar> doc_losses;   // one entry per column of S
  Scalar total = 0;
};

// Softmax cross entropy over the similarity matrix with in-batch negatives:
// rows play code-against-all-documents, columns the reverse. The total is
// averaged over the batch so its scale does not depend on batch size.
template <typename Scalar>
LossBreakdown<Scalar> contrastive_loss(const Matrix<Scalar>& sim, const LossConfig& cfg,
                                       bool require_negatives = true) {
  const Index n = sim.rows();
  if (sim.cols() != n) throw std::invalid_argument("similarity matrix must be square");
  if (n < 1) throw std::invalid_argument("empty similarity matrix");
  if (require_negatives && n < 2) throw std::invalid_argument("no in-batch negatives");

  LossBreakdown<Scalar> breakdown;
  breakdown.code_losses.resize(n);
  breakdown.doc_losses.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Vector<Scalar> row = sim.row(i).transpose();
    const Scalar lse = detail::log_sum_exp<Scalar>(row);
    breakdown.code_losses(i) =
        cfg.positive_mode == PositiveMode::kDiagonal ? lse - sim(i, i) : lse - row.sum() / Scalar(n);
  }
  for (Index j = 0; j < n; ++j) {
    const Vector<Scalar> col = sim.col(j);
    const Scalar lse = detail::log_sum_exp<Scalar>(col);
    breakdown.doc_losses(j) =
        cfg.positive_mode == PositiveMode::kDiagonal ? lse - sim(j, j) : lse - col.sum() / Scalar(n);
  }

  Scalar code_total = 0;
  Scalar doc_total = 0;
  for (Index i = 0; i < n; ++i) code_total += breakdown.code_losses(i);
  for (Index j = 0; j < n; ++j) doc_total += breakdown.doc_losses(j);
  code_total /= static_cast<Scalar>(n);
  doc_total /= static_cast<Scalar>(n);

  switch (cfg.loss_type) {
    case LossType::kSymmetric: breakdown.total = (code_total + doc_total) / Scalar(2); break;
    case LossType::kAsymmetricCode: breakdown.total = code_total; break;
    case LossType::kAsymmetricDoc: breakdown.total = doc_total; break;
  }
  if (!std::isfinite(static_cast<double>(breakdown.total))) {
    throw std::runtime_error("non-finite loss");
  }
  return breakdown;
}

// dTotal/dS. Row contribution in diagonal mode is (softmax(row i) - onehot(i))/n;
// in uniform mode the onehot becomes the uniform vector 1/n. Column parts are
// symmetric; reductions follow the configured loss type.
template <typename Scalar>
Matrix<Scalar> loss_gradient(const Matrix<Scalar>& sim, const LossConfig& cfg) {
  const Index n = sim.rows();
  if (sim.cols() != n) throw std::invalid_argument("similarity matrix must be square");
  if (n < 1) throw std::invalid_argument("empty similarity matrix");

  const Scalar row_weight =
      cfg.loss_type == LossType::kSymmetric ? Scalar(0.5) : cfg.loss_type == LossType::kAsymmetricCode ? Scalar(1) : Scalar(0);
  const Scalar col_weight =
      cfg.loss_type == LossType::kSymmetric ? Scalar(0.5) : cfg.loss_type == LossType::kAsymmetricDoc ? Scalar(1) : Scalar(0);

  Matrix<Scalar> grad = Matrix<Scalar>::Zero(n, n);
  if (row_weight != Scalar(0)) {
    for (Index i = 0; i < n; ++i) {
      const Vector<Scalar> row = sim.row(i).transpose();
      const Scalar lse = detail::log_sum_exp<Scalar>(row);
      for (Index j = 0; j < n; ++j) {
        Scalar g = std::exp(sim(i, j) - lse);
        g -= cfg.positive_mode == PositiveMode::kDiagonal ? Scalar(i == j) : Scalar(1) / Scalar(n);
        grad(i, j) += row_weight * g / Scalar(n);
      }
    }
  }
  if (col_weight != Scalar(0)) {
    for (Index j = 0; j < n; ++j) {
      const Vector<Scalar> col = sim.col(j);
      const Scalar lse = detail::log_sum_exp<Scalar>(col);
      for (Index i = 0; i < n; ++i) {
        Scalar g = std::exp(sim(i, j) - lse);
        g -= cfg.positive_mode == PositiveMode::kDiagonal ? Scalar(i == j) : Scalar(1) / Scalar(n);
        grad(i, j) += col_weight * g / Scalar(n);
      }
    }
  }
  return grad;
}

}  // namespace ccse
