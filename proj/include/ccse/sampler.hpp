#pragma once

#include "ccse/corpus.hpp"
#include "ccse/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ccse {

struct SamplerConfig {
  double alpha = 0.7;
  Index batch_size = 32;  // >= 2, a singleton batch has no in-batch negatives
  std::uint64_t seed = 42;
  std::vector<std::string> base_language_order;
};

// Exponentiated-fraction resampling weights: q_i = p_i^alpha / sum_k p_k^alpha.
// Smaller languages end up drawn more often than their share of the data.
std::vector<double> oversample_weights(const LanguageStats& stats, double alpha);

struct EpochPlan {
  std::int64_t epoch_index = 0;
  std::vector<std::string> language_order;   // base order rotated by epoch_index
  std::vector<std::int64_t> sampled_counts;  // m_i, aligned with language_order
  std::vector<std::int64_t> batch_counts;    // ceil(m_i / batch_size)
};

// Per-epoch sampling budget. The epoch total is scaled so the largest
// language is drawn exactly once on average (its ratio m_i/n_i is 1), which
// pins every other language's oversampling ratio. The language order is the
// base order with the last (epoch_index mod N) entries moved to the front,
// one per epoch.
EpochPlan plan_epoch(const LanguageStats& stats, const SamplerConfig& cfg, std::int64_t epoch_index);

// A monolingual minibatch; rows index into Corpus::examples.
struct Batch {
  std::string language;
  std::vector<std::size_t> rows;
};

// Draws m_i examples per language uniformly with replacement and slices them
// into batches, language-contiguously in plan order. The generator stream
// depends only on (seed, epoch_index, language), so draws are reproducible
// and refresh across epochs. A trailing batch of size < 2 is dropped.
std::vector<Batch> draw_batches(const Corpus& corpus, const EpochPlan& plan, const SamplerConfig& cfg);

}  // namespace ccse
