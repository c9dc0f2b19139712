#pragma once

#include "ccse/encoder.hpp"
#include "ccse/rng.hpp"
#include "ccse/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace ccse {

enum class PoolerType { kCls, kAvg, kAvgFirstLast };

inline std::string to_string(PoolerType p) {
  switch (p) {
    case PoolerType::kCls: return "cls";
    case PoolerType::kAvg: return "avg";
    case PoolerType::kAvgFirstLast: return "avg_first_last";
  }
  throw std::logic_error("bad pooler type");
}

inline PoolerType pooler_from_string(const std::string& s) {
  if (s == "cls") return PoolerType::kCls;
  if (s == "avg") return PoolerType::kAvg;
  if (s == "avg_first_last") return PoolerType::kAvgFirstLast;
  throw std::invalid_argument("unknown pooler type: " + s +
                              " (expected cls, avg or avg_first_last)");
}

// Pooling choice plus 0-2 square tanh MLP layers applied after pooling.
// The same head is applied to code and documents.
template <typename Scalar>
struct HeadConfig {
  PoolerType pooler = PoolerType::kAvg;
  Index mlp_layers = 0;
  Index dim = 0;
  std::vector<Matrix<Scalar>> mlp_weights;  // each h x h; v_out = tanh(v_in * W + b)
  std::vector<Matrix<Scalar>> mlp_biases;   // each 1 x h

  HeadConfig zeros_like() const {
    HeadConfig z = *this;
    for (auto& w : z.mlp_weights) w.setZero();
    for (auto& b : z.mlp_biases) b.setZero();
    return z;
  }

  template <typename Other>
  HeadConfig<Other> cast() const {
    HeadConfig<Other> out;
    out.pooler = pooler;
    out.mlp_layers = mlp_layers;
    out.dim = dim;
    for (const auto& w : mlp_weights) out.mlp_weights.push_back(w.template cast<Other>());
    for (const auto& b : mlp_biases) out.mlp_biases.push_back(b.template cast<Other>());
    return out;
  }
};

template <typename Scalar>
HeadConfig<Scalar> init_head(PoolerType pooler, Index mlp_layers, Index dim, std::uint64_t seed) {
  if (mlp_layers < 0 || mlp_layers > 2) throw std::invalid_argument("mlp_layers must be 0, 1 or 2");
  HeadConfig<Scalar> head;
  head.pooler = pooler;
  head.mlp_layers = mlp_layers;
  head.dim = dim;
  for (Index layer = 0; layer < mlp_layers; ++layer) {
    Rng rng(mix_seed(seed, fnv1a("mlp" + std::to_string(layer))));
    Matrix<Scalar> w(dim, dim);
    for (Index i = 0; i < dim; ++i) {
      for (Index j = 0; j < dim; ++j) w(i, j) = static_cast<Scalar>(rng.uniform(-0.05, 0.05));
    }
    Matrix<Scalar> b(1, dim);
    for (Index j = 0; j < dim; ++j) b(0, j) = static_cast<Scalar>(rng.uniform(-0.05, 0.05));
    head.mlp_weights.push_back(std::move(w));
    head.mlp_biases.push_back(std::move(b));
  }
  return head;
}

// A minibatch after encoding: paired code and document embeddings, unit rows.
template <typename Scalar>
struct EmbeddingBatch {
  Matrix<Scalar> code;  // n x h
  Matrix<Scalar> docs;  // n x h
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> pool_states(const LayerStates<Scalar>& states, PoolerType pooler) {
  Matrix<Scalar> pooled = Matrix<Scalar>::Zero(states.batch, states.dim);
  for (Index b = 0; b < states.batch; ++b) {
    Scalar count = 0;
    for (Index t = 0; t < states.seq; ++t) count += static_cast<Scalar>(states.mask(b, t));
    if (count == Scalar(0)) throw std::runtime_error("empty sequence: row " + std::to_string(b));
    const Index base = b * states.seq;
    switch (pooler) {
      case PoolerType::kCls:
        pooled.row(b) = states.last.row(base);
        break;
      case PoolerType::kAvg:
        for (Index t = 0; t < states.seq; ++t) {
          if (states.mask(b, t)) pooled.row(b) += states.last.row(base + t);
        }
        pooled.row(b) /= count;
        break;
      case PoolerType::kAvgFirstLast:
        for (Index t = 0; t < states.seq; ++t) {
          if (states.mask(b, t)) {
            pooled.row(b) += states.first.row(base + t) + states.last.row(base + t);
          }
        }
        pooled.row(b) /= Scalar(2) * count;
        break;
    }
  }
  return pooled;
}

// Pooled vector and the activation after each MLP layer; layer 0 is the
// pooled input.
template <typename Scalar>
std::vector<Matrix<Scalar>> head_activations(const LayerStates<Scalar>& states,
                                             const HeadConfig<Scalar>& head) {
  std::vector<Matrix<Scalar>> activations;
  activations.push_back(pool_states(states, head.pooler));
  for (Index layer = 0; layer < head.mlp_layers; ++layer) {
    const auto u = static_cast<std::size_t>(layer);
    Matrix<Scalar> z =
        (activations.back() * head.mlp_weights[u]).rowwise() + head.mlp_biases[u].row(0);
    activations.push_back(z.array().tanh());
  }
  return activations;
}

template <typename Scalar>
Vector<Scalar> row_norms(const Matrix<Scalar>& m) {
  return m.rowwise().norm();
}

}  // namespace detail

// Pools per-token states into one embedding per example, applies the MLP
// stack and L2-normalizes each row.
template <typename Scalar>
Matrix<Scalar> embed(const LayerStates<Scalar>& states, const HeadConfig<Scalar>& head) {
  if (static_cast<Index>(head.mlp_weights.size()) != head.mlp_layers ||
      static_cast<Index>(head.mlp_biases.size()) != head.mlp_layers) {
    throw std::invalid_argument("mlp_layers does not match the number of weight sets");
  }
  const auto activations = detail::head_activations(states, head);
  Matrix<Scalar> out = activations.back();
  const Vector<Scalar> norms = detail::row_norms(out);
  for (Index i = 0; i < out.rows(); ++i) {
    if (!(norms(i) > Scalar(0))) {
      throw std::runtime_error("zero-norm embedding: row " + std::to_string(i));
    }
    out.row(i) /= norms(i);
  }
  return out;
}

template <typename Scalar>
struct HeadGrads {
  std::vector<Matrix<Scalar>> mlp_weights;
  std::vector<Matrix<Scalar>> mlp_biases;
  Matrix<Scalar> dfirst;  // (batch*seq) x dim
  Matrix<Scalar> dlast;
};

// Exact gradients through normalization, the MLP stack and pooling. Masked
// positions receive zero gradient.
template <typename Scalar>
HeadGrads<Scalar> head_backward(const LayerStates<Scalar>& states, const HeadConfig<Scalar>& head,
                                const Matrix<Scalar>& upstream) {
  const auto activations = detail::head_activations(states, head);
  const Matrix<Scalar>& final_act = activations.back();
  if (upstream.rows() != final_act.rows() || upstream.cols() != final_act.cols()) {
    throw std::invalid_argument("upstream gradient shape does not match embeddings");
  }

  // Through y = v / |v|:  dv = (g - y (y.g)) / |v|.
  const Vector<Scalar> norms = detail::row_norms(final_act);
  Matrix<Scalar> grad(final_act.rows(), final_act.cols());
  for (Index i = 0; i < final_act.rows(); ++i) {
    if (!(norms(i) > Scalar(0))) {
      throw std::runtime_error("zero-norm embedding: row " + std::to_string(i));
    }
    const auto y = final_act.row(i) / norms(i);
    const Scalar along = y.dot(upstream.row(i));
    grad.row(i) = (upstream.row(i) - along * y) / norms(i);
  }

  HeadGrads<Scalar> grads;
  grads.mlp_weights.resize(static_cast<std::size_t>(head.mlp_layers));
  grads.mlp_biases.resize(static_cast<std::size_t>(head.mlp_layers));
  for (Index layer = head.mlp_layers - 1; layer >= 0; --layer) {
    const auto u = static_cast<std::size_t>(layer);
    const Matrix<Scalar>& out_act = activations[u + 1];
    const Matrix<Scalar>& in_act = activations[u];
    const Matrix<Scalar> dz = grad.array() * (Scalar(1) - out_act.array().square());
    grads.mlp_weights[u] = in_act.transpose() * dz;
    grads.mlp_biases[u] = dz.colwise().sum();
    grad = dz * head.mlp_weights[u].transpose();
  }

  grads.dfirst = Matrix<Scalar>::Zero(states.batch * states.seq, states.dim);
  grads.dlast = Matrix<Scalar>::Zero(states.batch * states.seq, states.dim);
  for (Index b = 0; b < states.batch; ++b) {
    Scalar count = 0;
    for (Index t = 0; t < states.seq; ++t) count += static_cast<Scalar>(states.mask(b, t));
    const Index base = b * states.seq;
    switch (head.pooler) {
      case PoolerType::kCls:
        grads.dlast.row(base) = grad.row(b);
        break;
      case PoolerType::kAvg:
        for (Index t = 0; t < states.seq; ++t) {
          if (states.mask(b, t)) grads.dlast.row(base + t) = grad.row(b) / count;
        }
        break;
      case PoolerType::kAvgFirstLast:
        for (Index t = 0; t < states.seq; ++t) {
          if (states.mask(b, t)) {
            grads.dfirst.row(base + t) = grad.row(b) / (Scalar(2) * count);
            grads.dlast.row(base + t) = grad.row(b) / (Scalar(2) * count);
          }
        }
        break;
    }
  }
  return grads;
}

}  // namespace ccse
