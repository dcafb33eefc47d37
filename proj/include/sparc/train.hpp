#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparc/dataset.hpp"
#include "sparc/model.hpp"
#include "sparc/tfidf.hpp"

namespace sparc {

enum class NegMode { None, Tfidf, Dense };

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 20;
    int batch_size = 8;
    std::uint64_t seed = 0;
    double dense_only_weight = 1.0;  // lambda_d on the dense-only NLL
    NegMode neg_mode = NegMode::Dense;
    double tfidf_coeff = 1.0;  // word-level tf-idf boost on negative regions
    int threads = 1;
};

struct LossBreakdown {
    double total = 0.0;
    double combined_nll = 0.0;  // NLL over dense + sparse span logits
    double dense_nll = 0.0;     // NLL over dense-only span logits
};

/// Negative log likelihood over the sum of dense and sparse span logits,
/// plus dense_only_weight times the dense-only NLL. Both log-sum-exps are
/// max-subtracted; each term is >= 0.
LossBreakdown loss(const TrainingExample& ex, const ModelParams& params,
                   double dense_only_weight);

/// Same forward plus analytic gradients accumulated into `grads`.
LossBreakdown loss_and_grads(const TrainingExample& ex, const ModelParams& params,
                             double dense_only_weight, ModelGrads& grads);

/// For each example, the index of the example whose paragraph becomes its
/// negative: the one whose question representation is most similar (tf-idf
/// cosine or dense [CLS] cosine). Never pairs an example with its own
/// paragraph; returns the example's own index when no usable partner exists.
std::vector<std::size_t> mine_negative(const std::vector<TrainingExample>& examples,
                                       const ModelParams& params, NegMode mode);

/// Additive word-level logits over the negative region:
/// coeff * (1 + ln tf(w, neg)) * idf(w) for question terms w; zero elsewhere.
std::vector<double> negative_tfidf_logits(const TrainingExample& ex, const TfidfStats& stats,
                                          const Vocabulary& vocab, double coeff);

/// Appends the partner's paragraph behind a [PAD] separator; gold indices
/// are unchanged. Computes the tf-idf word-logit extras when coeff != 0.
TrainingExample attach_negative(const TrainingExample& base, const TrainingExample& partner,
                                const Vocabulary& vocab, const TfidfStats& stats, double coeff);

struct TrainResult {
    std::vector<double> epoch_mean_loss;
};

/// Adam (0.9/0.999/1e-8) over shuffled batches with summed batch gradients;
/// negatives are re-mined each epoch. Deterministic given the seed. Throws
/// InternalError naming the step if the loss turns non-finite.
TrainResult train(const std::vector<TrainingExample>& dataset, ModelParams& params,
                  const TrainConfig& cfg);

}  // namespace sparc
