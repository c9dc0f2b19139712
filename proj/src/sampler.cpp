#include "ccse/sampler.hpp"

#include "ccse/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ccse {

std::vector<double> oversample_weights(const LanguageStats& stats, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("alpha must be in (0, 1]");
  if (stats.size() == 0) throw std::invalid_argument("no languages in stats");
  for (std::size_t i = 0; i < stats.languages.size(); ++i) {
    if (stats.counts[i] == 0) {
      throw std::runtime_error("language with zero examples: " + stats.languages[i]);
    }
  }
  std::vector<double> weights(stats.fractions.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < stats.fractions.size(); ++i) {
    weights[i] = std::pow(stats.fractions[i], alpha);
    norm += weights[i];
  }
  for (double& w : weights) w /= norm;
  return weights;
}

EpochPlan plan_epoch(const LanguageStats& stats, const SamplerConfig& cfg, std::int64_t epoch_index) {
  if (epoch_index < 0) throw std::invalid_argument("epoch_index must be nonnegative");
  if (cfg.batch_size < 2) throw std::invalid_argument("batch_size must be at least 2");
  if (cfg.base_language_order.empty()) throw std::invalid_argument("base_language_order is empty");
  for (const auto& language : cfg.base_language_order) {
    if (stats.find(language) < 0) {
      throw std::invalid_argument("language not present in stats: " + language);
    }
  }

  const std::vector<double> weights = oversample_weights(stats, cfg.alpha);

  // Epoch budget: the language with the largest count-to-weight ratio is
  // drawn exactly its own size; everyone else is oversampled.
  double budget = 0.0;
  for (Index i = 0; i < stats.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    budget = std::max(budget, static_cast<double>(stats.counts[u]) / weights[u]);
  }

  EpochPlan plan;
  plan.epoch_index = epoch_index;

  const std::size_t n_langs = cfg.base_language_order.size();
  const std::size_t shift = static_cast<std::size_t>(epoch_index) % n_langs;
  plan.language_order.reserve(n_langs);
  for (std::size_t i = 0; i < n_langs; ++i) {
    plan.language_order.push_back(cfg.base_language_order[(n_langs - shift + i) % n_langs]);
  }

  plan.sampled_counts.reserve(n_langs);
  plan.batch_counts.reserve(n_langs);
  for (const auto& language : plan.language_order) {
    const auto pos = static_cast<std::size_t>(stats.find(language));
    const auto sampled = static_cast<std::int64_t>(std::llround(weights[pos] * budget));
    plan.sampled_counts.push_back(sampled);
    plan.batch_counts.push_back((sampled + cfg.batch_size - 1) / cfg.batch_size);
  }
  return plan;
}

std::vector<Batch> draw_batches(const Corpus& corpus, const EpochPlan& plan, const SamplerConfig& cfg) {
  std::vector<Batch> batches;
  for (std::size_t li = 0; li < plan.language_order.size(); ++li) {
    const std::string& language = plan.language_order[li];
    const Index lang_pos = corpus.stats.find(language);
    if (lang_pos < 0) throw std::invalid_argument("language not present in corpus: " + language);
    const auto& pool = corpus.by_language[static_cast<std::size_t>(lang_pos)];
    if (pool.empty()) throw std::runtime_error("language with zero examples: " + language);

    // One stream per (seed, epoch, language): language draws do not depend
    // on the rotation position, and every epoch gets fresh negatives.
    Rng rng(mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(plan.epoch_index)), fnv1a(language)));

    const std::int64_t sampled = plan.sampled_counts[li];
    std::int64_t emitted = 0;
    while (emitted < sampled) {
      const Index size = std::min<std::int64_t>(cfg.batch_size, sampled - emitted);
      if (size < 2) break;  // no in-batch negatives in a singleton batch
      Batch batch;
      batch.language = language;
      batch.rows.reserve(static_cast<std::size_t>(size));
      for (Index k = 0; k < size; ++k) {
        batch.rows.push_back(pool[rng.below(pool.size())]);
      }
      batches.push_back(std::move(batch));
      emitted += size;
    }
  }
  return batches;
}

}  // namespace ccse
