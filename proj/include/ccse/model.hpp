#pragma once

#include "ccse/encoder.hpp"
#include "ccse/head.hpp"
#include "ccse/loss.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ccse {

// Trainable state: the shared encoder plus the shared projection head.
template <typename Scalar>
struct Model {
  TinyEncoderParams<Scalar> encoder;
  HeadConfig<Scalar> head;

  Model zeros_like() const {
    Model z;
    z.encoder = encoder.zeros_like();
    z.head = head.zeros_like();
    return z;
  }

  template <typename Other>
  Model<Other> cast() const {
    Model<Other> out;
    out.encoder = encoder.template cast<Other>();
    out.head = head.template cast<Other>();
    return out;
  }

  // Named views over every trainable tensor, in serialization order.
  std::vector<std::pair<std::string, Matrix<Scalar>*>> tensors() {
    std::vector<std::pair<std::string, Matrix<Scalar>*>> all = {
        {"E", &encoder.token_table},
        {"P", &encoder.position_table},
        {"W1", &encoder.ff_weight},
        {"b1", &encoder.ff_bias},
    };
    for (Index layer = 0; layer < head.mlp_layers; ++layer) {
      const auto u = static_cast<std::size_t>(layer);
      all.emplace_back("mlp" + std::to_string(layer) + "_W", &head.mlp_weights[u]);
      all.emplace_back("mlp" + std::to_string(layer) + "_b", &head.mlp_biases[u]);
    }
    return all;
  }

  std::vector<std::pair<std::string, const Matrix<Scalar>*>> tensors() const {
    auto mutable_view = const_cast<Model*>(this)->tensors();
    std::vector<std::pair<std::string, const Matrix<Scalar>*>> all;
    all.reserve(mutable_view.size());
    for (auto& [name, tensor] : mutable_view) all.emplace_back(name, tensor);
    return all;
  }

  std::size_t parameter_count() const {
    std::size_t count = 0;
    for (const auto& [name, tensor] : tensors()) count += static_cast<std::size_t>(tensor->size());
    return count;
  }
};

template <typename Scalar>
Model<Scalar> init_model(Index vocab_size, Index max_len, Index hidden_dim, PoolerType pooler,
                         Index mlp_layers, std::uint64_t seed) {
  Model<Scalar> model;
  model.encoder = init_tiny_encoder<Scalar>(vocab_size, max_len, hidden_dim, seed);
  model.head = init_head<Scalar>(pooler, mlp_layers, hidden_dim, seed);
  return model;
}

// Unit-row sentence embeddings for one side of a batch.
template <typename Scalar>
Matrix<Scalar> embed_tokens(const Model<Scalar>& model, const TokenBatch& batch) {
  return embed(tiny_forward(model.encoder, batch), model.head);
}

template <typename Scalar>
EmbeddingBatch<Scalar> embed_pair(const Model<Scalar>& model, const TokenBatch& code,
                                  const TokenBatch& docs) {
  return {embed_tokens(model, code), embed_tokens(model, docs)};
}

// Batch loss through encoder, head and similarity.
template <typename Scalar>
Scalar batch_loss(const Model<Scalar>& model, const TokenBatch& code, const TokenBatch& docs,
                  const LossConfig& cfg, LossBreakdown<Scalar>* breakdown = nullptr) {
  const EmbeddingBatch<Scalar> batch = embed_pair(model, code, docs);
  const Matrix<Scalar> sim =
      similarity_matrix(batch.code, batch.docs, static_cast<Scalar>(cfg.temperature));
  LossBreakdown<Scalar> local = contrastive_loss(sim, cfg);
  const Scalar total = local.total;
  if (breakdown != nullptr) *breakdown = std::move(local);
  return total;
}

// Loss plus exact gradients for every trainable tensor. Encoder and head are
// shared between the two sides, so both contributions accumulate.
template <typename Scalar>
Scalar batch_loss_and_grad(const Model<Scalar>& model, const TokenBatch& code, const TokenBatch& docs,
                           const LossConfig& cfg, Model<Scalar>& grads) {
  const LayerStates<Scalar> code_states = tiny_forward(model.encoder, code);
  const LayerStates<Scalar> doc_states = tiny_forward(model.encoder, docs);
  const Matrix<Scalar> code_emb = embed(code_states, model.head);
  const Matrix<Scalar> doc_emb = embed(doc_states, model.head);

  const Scalar tau = static_cast<Scalar>(cfg.temperature);
  const Matrix<Scalar> sim = similarity_matrix(code_emb, doc_emb, tau);
  const LossBreakdown<Scalar> breakdown = contrastive_loss(sim, cfg);

  const Matrix<Scalar> dsim = loss_gradient(sim, cfg);
  const Matrix<Scalar> dcode = (dsim * doc_emb) / tau;
  const Matrix<Scalar> ddocs = (dsim.transpose() * code_emb) / tau;

  const HeadGrads<Scalar> code_head = head_backward(code_states, model.head, dcode);
  const HeadGrads<Scalar> doc_head = head_backward(doc_states, model.head, ddocs);
  const TinyEncoderParams<Scalar> code_enc =
      tiny_backward(model.encoder, code, code_head.dfirst, code_head.dlast);
  const TinyEncoderParams<Scalar> doc_enc =
      tiny_backward(model.encoder, docs, doc_head.dfirst, doc_head.dlast);

  grads = model.zeros_like();
  grads.encoder.token_table = code_enc.token_table + doc_enc.token_table;
  grads.encoder.position_table = code_enc.position_table + doc_enc.position_table;
  grads.encoder.ff_weight = code_enc.ff_weight + doc_enc.ff_weight;
  grads.encoder.ff_bias = code_enc.ff_bias + doc_enc.ff_bias;
  for (Index layer = 0; layer < model.head.mlp_layers; ++layer) {
    const auto u = static_cast<std::size_t>(layer);
    grads.head.mlp_weights[u] = code_head.mlp_weights[u] + doc_head.mlp_weights[u];
    grads.head.mlp_biases[u] = code_head.mlp_biases[u] + doc_head.mlp_biases[u];
  }
  return breakdown.total;
}

}  // namespace ccse
