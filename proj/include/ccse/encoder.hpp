#pragma once

#include "ccse/corpus.hpp"
#include "ccse/rng.hpp"
#include "ccse/types.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccse {

// Per-token hidden states of a batch, flattened to (batch*seq) x dim with row
// b*seq + t holding example b position t. PAD rows are zero in both layers.
template <typename Scalar>
struct LayerStates {
  Matrix<Scalar> first;  // embedding-plus-position layer
  Matrix<Scalar> last;   // feed-forward output layer
  MaskMatrix mask;       // batch x seq
  Index batch = 0;
  Index seq = 0;
  Index dim = 0;
};

// One token-embedding table, one learned position table and a single
// position-wise tanh feed-forward layer. Small enough to train on one core
// while still producing two distinct layers for pooling.
template <typename Scalar>
struct TinyEncoderParams {
  Matrix<Scalar> token_table;     // V x h, block "E"
  Matrix<Scalar> position_table;  // L x h, block "P"
  Matrix<Scalar> ff_weight;       // h x h, block "W1"
  Matrix<Scalar> ff_bias;         // 1 x h, block "b1"

  Index vocab_size() const { return token_table.rows(); }
  Index max_len() const { return position_table.rows(); }
  Index hidden_dim() const { return token_table.cols(); }

  TinyEncoderParams zeros_like() const {
    TinyEncoderParams z;
    z.token_table = Matrix<Scalar>::Zero(token_table.rows(), token_table.cols());
    z.position_table = Matrix<Scalar>::Zero(position_table.rows(), position_table.cols());
    z.ff_weight = Matrix<Scalar>::Zero(ff_weight.rows(), ff_weight.cols());
    z.ff_bias = Matrix<Scalar>::Zero(ff_bias.rows(), ff_bias.cols());
    return z;
  }

  template <typename Other>
  TinyEncoderParams<Other> cast() const {
    TinyEncoderParams<Other> out;
    out.token_table = token_table.template cast<Other>();
    out.position_table = position_table.template cast<Other>();
    out.ff_weight = ff_weight.template cast<Other>();
    out.ff_bias = ff_bias.template cast<Other>();
    return out;
  }
};

template <typename Scalar>
TinyEncoderParams<Scalar> init_tiny_encoder(Index vocab_size, Index max_len, Index hidden_dim,
                                            std::uint64_t seed) {
  auto fill = [&](Matrix<Scalar>& m, Index rows, Index cols, std::string_view name) {
    Rng rng(mix_seed(seed, fnv1a(name)));
    m.resize(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        m(i, j) = static_cast<Scalar>(rng.uniform(-0.05, 0.05));
      }
    }
  };
  TinyEncoderParams<Scalar> params;
  fill(params.token_table, vocab_size, hidden_dim, "E");
  fill(params.position_table, max_len, hidden_dim, "P");
  fill(params.ff_weight, hidden_dim, hidden_dim, "W1");
  fill(params.ff_bias, 1, hidden_dim, "b1");
  return params;
}

namespace detail {

// Row indices (into the flattened batch*seq layout) of unmasked positions.
inline std::vector<Index> real_rows(const MaskMatrix& mask) {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(mask.size()));
  for (Index b = 0; b < mask.rows(); ++b) {
    for (Index t = 0; t < mask.cols(); ++t) {
      if (mask(b, t)) rows.push_back(b * mask.cols() + t);
    }
  }
  return rows;
}

}  // namespace detail

// first[b,t] = E[id] + P[t]; last[b,t] = tanh(first[b,t] * W1 + b1).
// PAD positions are zero in both layers. The feed-forward product runs on the
// packed real rows only, which keeps long padded tails cheap.
template <typename Scalar>
LayerStates<Scalar> tiny_forward(const TinyEncoderParams<Scalar>& params, const TokenBatch& batch) {
  const Index n = batch.batch();
  const Index seq = batch.seq();
  const Index dim = params.hidden_dim();
  if (seq > params.max_len()) {
    throw std::invalid_argument("sequence length " + std::to_string(seq) +
                                " exceeds encoder max_len " + std::to_string(params.max_len()));
  }

  const std::vector<Index> rows = detail::real_rows(batch.mask);
  Matrix<Scalar> packed(static_cast<Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index b = rows[r] / seq;
    const Index t = rows[r] % seq;
    const std::int32_t id = batch.ids(b, t);
    if (id < 0 || id >= params.vocab_size()) {
      throw std::runtime_error("id out of vocabulary: " + std::to_string(id));
    }
    packed.row(static_cast<Index>(r)) = params.token_table.row(id) + params.position_table.row(t);
  }

  Matrix<Scalar> packed_last = (packed * params.ff_weight).rowwise() + params.ff_bias.row(0);
  packed_last = packed_last.array().tanh();

  LayerStates<Scalar> states;
  states.batch = n;
  states.seq = seq;
  states.dim = dim;
  states.mask = batch.mask;
  states.first = Matrix<Scalar>::Zero(n * seq, dim);
  states.last = Matrix<Scalar>::Zero(n * seq, dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    states.first.row(rows[r]) = packed.row(static_cast<Index>(r));
    states.last.row(rows[r]) = packed_last.row(static_cast<Index>(r));
  }
  return states;
}

// Exact gradients of tiny_forward. Upstream gradients arrive on both layers;
// PAD rows contribute nothing regardless of their upstream values.
template <typename Scalar>
TinyEncoderParams<Scalar> tiny_backward(const TinyEncoderParams<Scalar>& params, const TokenBatch& batch,
                                        const Matrix<Scalar>& dfirst, const Matrix<Scalar>& dlast) {
  const Index n = batch.batch();
  const Index seq = batch.seq();
  const Index dim = params.hidden_dim();
  if (dfirst.rows() != n * seq || dfirst.cols() != dim || dlast.rows() != n * seq || dlast.cols() != dim) {
    throw std::invalid_argument("upstream gradient shape does not match layer states");
  }

  const std::vector<Index> rows = detail::real_rows(batch.mask);
  Matrix<Scalar> packed(static_cast<Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index b = rows[r] / seq;
    const Index t = rows[r] % seq;
    const std::int32_t id = batch.ids(b, t);
    if (id < 0 || id >= params.vocab_size()) {
      throw std::runtime_error("id out of vocabulary: " + std::to_string(id));
    }
    packed.row(static_cast<Index>(r)) = params.token_table.row(id) + params.position_table.row(t);
  }
  Matrix<Scalar> activation = (packed * params.ff_weight).rowwise() + params.ff_bias.row(0);
  activation = activation.array().tanh();

  Matrix<Scalar> dz(packed.rows(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    dz.row(static_cast<Index>(r)) =
        dlast.row(rows[r]).array() * (Scalar(1) - activation.row(static_cast<Index>(r)).array().square());
  }

  TinyEncoderParams<Scalar> grads = params.zeros_like();
  grads.ff_weight = packed.transpose() * dz;
  grads.ff_bias.row(0) = dz.colwise().sum();

  const Matrix<Scalar> dpacked = dz * params.ff_weight.transpose();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index b = rows[r] / seq;
    const Index t = rows[r] % seq;
    const auto contribution = dpacked.row(static_cast<Index>(r)) + dfirst.row(rows[r]);
    grads.token_table.row(batch.ids(b, t)) += contribution;
    grads.position_table.row(t) += contribution;
  }
  return grads;
}

// Row-normalized external embedding matrices with their ids, read from a
// pair of CCSE files plus ".ids" sidecars next to them.
struct ExternalEmbeddings {
  MatrixF code;
  MatrixF docs;
  std::vector<std::string> code_ids;
  std::vector<std::string> doc_ids;
};

ExternalEmbeddings load_external_embeddings(const std::filesystem::path& code_path,
                                            const std::filesystem::path& doc_path);

}  // namespace ccse
