#include "sparc/train.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_set>

#include "sparc/errors.hpp"
#include "sparc/parallel.hpp"
#include "sparc/rng.hpp"

namespace sparc {

namespace {

std::vector<bool> special_mask(const TokenSeq& seq, const Vocabulary& vocab) {
    std::vector<bool> mask(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) mask[i] = vocab.is_special(seq.ids[i]);
    return mask;
}

/// Stable softmax over valid spans of the factored logits l_{i,j} = s_i + e_j.
/// Returns the NLL and fills per-position marginal minus gold indicators,
/// i.e. dNLL/ds and dNLL/de.
double span_nll(const Vec& s, const Vec& e, const std::vector<SpanCandidate>& spans,
                std::uint32_t gold_start, std::uint32_t gold_end, Vec* d_s, Vec* d_e) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (const auto& sp : spans) max_logit = std::max(max_logit, s(sp.start) + e(sp.end));
    double z = 0.0;
    for (const auto& sp : spans) z += std::exp(s(sp.start) + e(sp.end) - max_logit);
    const double lse = max_logit + std::log(z);
    const double gold = s(gold_start) + e(gold_end);
    if (d_s && d_e) {
        for (const auto& sp : spans) {
            const double p = std::exp(s(sp.start) + e(sp.end) - max_logit) / z;
            (*d_s)(sp.start) += p;
            (*d_e)(sp.end) += p;
        }
        (*d_s)(gold_start) -= 1.0;
        (*d_e)(gold_end) -= 1.0;
    }
    return lse - gold;
}

/// Everything the forward pass produces that the backward pass consumes.
struct ExampleForward {
    EncoderForward doc, question;
    Mat doc_start_proj, doc_end_proj;  // H_doc * W  (N x d_p)
    Vec q_start_vec, q_end_vec;        // question head outputs (d_p)
    Vec dense_start, dense_end;        // per-position dense word logits
    std::vector<MatchMatrix> kernels;  // per order
    std::array<std::vector<SparcHeadForward>, 2> sparc;  // [role][order idx]
    Vec sparse_start, sparse_end;      // summed over orders
    std::vector<SpanCandidate> spans;
    LossBreakdown breakdown;
    // dNLL/d(word logit) marginals for both loss terms
    Vec d_comb_s, d_comb_e, d_dense_s, d_dense_e;
};

ExampleForward example_forward(const TrainingExample& ex, const ModelParams& params,
                               double dense_only_weight, bool want_grads) {
    if (ex.question.size() == 0 || !ex.question.is_question ||
        ex.question.ids[0] != params.vocab.cls_id)
        throw UsageError("question sequence must start with [CLS]");

    ExampleForward f;
    f.doc = encoder_forward(ex.paragraph, params.encoder);
    f.question = encoder_forward(ex.question, params.encoder);
    const auto n = static_cast<Eigen::Index>(ex.paragraph.size());

    // Dense word logits.
    f.doc_start_proj = f.doc.h * params.dense.doc_start;
    f.doc_end_proj = f.doc.h * params.dense.doc_end;
    f.q_start_vec = (f.question.h.row(0) * params.dense.q_start).transpose();
    f.q_end_vec = (f.question.h.row(0) * params.dense.q_end).transpose();
    f.dense_start = f.doc_start_proj * f.q_start_vec;
    f.dense_end = f.doc_end_proj * f.q_end_vec;

    // Kernelized sparse word logits, summed over n-gram orders.
    f.sparse_start = Vec::Zero(n);
    f.sparse_end = Vec::Zero(n);
    for (std::size_t o = 0; o < params.cfg.orders.size(); ++o) {
        const int order = params.cfg.orders[o];
        const auto doc_feat = ngram_features(ex.paragraph, params.vocab, order);
        const auto q_feat = ngram_features(ex.question, params.vocab, order);
        f.kernels.push_back(match_kernel(doc_feat, q_feat));
        for (int role = 0; role < 2; ++role) {
            f.sparc[role].push_back(sparc_head_forward(
                f.doc.h, f.question.h, params.sparc.head(static_cast<Role>(role), o),
                f.kernels.back()));
            Vec& target = role == 0 ? f.sparse_start : f.sparse_end;
            const auto& logits = f.sparc[role].back().logits;
            for (Eigen::Index i = 0; i < n; ++i) target(i) += logits[i];
        }
    }

    Vec extra_s = Vec::Zero(n), extra_e = Vec::Zero(n);
    if (!ex.extra_start_logits.empty()) {
        if (ex.extra_start_logits.size() != static_cast<std::size_t>(n))
            throw UsageError("extra start logits length mismatch");
        extra_s = Eigen::Map<const Vec>(ex.extra_start_logits.data(), n);
    }
    if (!ex.extra_end_logits.empty()) {
        if (ex.extra_end_logits.size() != static_cast<std::size_t>(n))
            throw UsageError("extra end logits length mismatch");
        extra_e = Eigen::Map<const Vec>(ex.extra_end_logits.data(), n);
    }

    const Vec dense_s = f.dense_start + extra_s;
    const Vec dense_e = f.dense_end + extra_e;
    const Vec comb_s = dense_s + f.sparse_start;
    const Vec comb_e = dense_e + f.sparse_end;

    f.spans = enumerate_spans(ex.paragraph.size(),
                              static_cast<std::size_t>(params.cfg.max_span_len),
                              special_mask(ex.paragraph, params.vocab));
    if (f.spans.empty()) throw DataError("no valid spans in paragraph");

    const bool gold_valid =
        ex.gold_end >= ex.gold_start && ex.gold_end < ex.paragraph.size() &&
        ex.gold_end - ex.gold_start < static_cast<std::uint32_t>(params.cfg.max_span_len) &&
        !params.vocab.is_special(ex.paragraph.ids[ex.gold_start]) &&
        !params.vocab.is_special(ex.paragraph.ids[ex.gold_end]);
    if (!gold_valid) throw DataError("gold span invalid");

    if (want_grads) {
        f.d_comb_s = Vec::Zero(n);
        f.d_comb_e = Vec::Zero(n);
        f.d_dense_s = Vec::Zero(n);
        f.d_dense_e = Vec::Zero(n);
    }
    f.breakdown.combined_nll = span_nll(comb_s, comb_e, f.spans, ex.gold_start, ex.gold_end,
                                        want_grads ? &f.d_comb_s : nullptr,
                                        want_grads ? &f.d_comb_e : nullptr);
    f.breakdown.dense_nll = span_nll(dense_s, dense_e, f.spans, ex.gold_start, ex.gold_end,
                                     want_grads ? &f.d_dense_s : nullptr,
                                     want_grads ? &f.d_dense_e : nullptr);
    f.breakdown.total = f.breakdown.combined_nll + dense_only_weight * f.breakdown.dense_nll;
    return f;
}

}  // namespace

LossBreakdown loss(const TrainingExample& ex, const ModelParams& params,
                   double dense_only_weight) {
    return example_forward(ex, params, dense_only_weight, false).breakdown;
}

LossBreakdown loss_and_grads(const TrainingExample& ex, const ModelParams& params,
                             double dense_only_weight, ModelGrads& grads) {
    ExampleForward f = example_forward(ex, params, dense_only_weight, true);

    // Word-logit gradients. The sparse path only sees the combined loss.
    const Vec d_dense_s = f.d_comb_s + dense_only_weight * f.d_dense_s;
    const Vec d_dense_e = f.d_comb_e + dense_only_weight * f.d_dense_e;

    Mat d_h_doc = Mat::Zero(f.doc.h.rows(), f.doc.h.cols());
    Mat d_h_q = Mat::Zero(f.question.h.rows(), f.question.h.cols());

    // Dense heads: start side.
    {
        const Mat d_proj = d_dense_s * f.q_start_vec.transpose();  // N x d_p
        grads.dense_doc_start += f.doc.h.transpose() * d_proj;
        d_h_doc += d_proj * params.dense.doc_start.transpose();
        const Vec d_qvec = f.doc_start_proj.transpose() * d_dense_s;
        grads.dense_q_start += f.question.h.row(0).transpose() * d_qvec.transpose();
        d_h_q.row(0) += (params.dense.q_start * d_qvec).transpose();
    }
    // Dense heads: end side.
    {
        const Mat d_proj = d_dense_e * f.q_end_vec.transpose();
        grads.dense_doc_end += f.doc.h.transpose() * d_proj;
        d_h_doc += d_proj * params.dense.doc_end.transpose();
        const Vec d_qvec = f.doc_end_proj.transpose() * d_dense_e;
        grads.dense_q_end += f.question.h.row(0).transpose() * d_qvec.transpose();
        d_h_q.row(0) += (params.dense.q_end * d_qvec).transpose();
    }

    // Sparse heads.
    for (std::size_t o = 0; o < params.cfg.orders.size(); ++o) {
        for (int role = 0; role < 2; ++role) {
            const Vec& d = role == 0 ? f.d_comb_s : f.d_comb_e;
            const std::vector<double> d_logits(d.data(), d.data() + d.size());
            sparc_head_backward(f.doc.h, f.question.h,
                                params.sparc.head(static_cast<Role>(role), o), f.kernels[o],
                                f.sparc[role][o], d_logits, grads.sparc[role][o], d_h_doc, d_h_q);
        }
    }

    // Shared encoder: document and question gradients accumulate together.
    encoder_backward(params.encoder, f.doc, d_h_doc, grads.encoder);
    encoder_backward(params.encoder, f.question, d_h_q, grads.encoder);
    return f.breakdown;
}

std::vector<std::size_t> mine_negative(const std::vector<TrainingExample>& examples,
                                       const ModelParams& params, NegMode mode) {
    const std::size_t n = examples.size();
    std::vector<std::size_t> pairing(n);
    for (std::size_t i = 0; i < n; ++i) pairing[i] = i;
    if (mode == NegMode::None) return pairing;
    if (n < 2) throw DataError("insufficient examples for negatives");

    // Question representations under the requested similarity.
    std::vector<TfidfVector> tfidf_reprs;
    std::vector<Vec> dense_reprs;
    if (mode == NegMode::Tfidf) {
        std::vector<std::vector<TokenId>> question_tokens(n);
        for (std::size_t i = 0; i < n; ++i) question_tokens[i] = examples[i].question.ids;
        const TfidfStats stats = compute_tfidf_stats(question_tokens, params.vocab);
        tfidf_reprs.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            tfidf_reprs[i] = tfidf_vector(examples[i].question.ids, stats, params.vocab);
    } else {
        dense_reprs.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Mat h = encode(examples[i].question, params.encoder);
            Vec v(2 * params.cfg.d_p);
            v << (h.row(0) * params.dense.q_start).transpose(),
                (h.row(0) * params.dense.q_end).transpose();
            const double norm = v.norm();
            dense_reprs[i] = norm > 0.0 ? Vec(v / norm) : v;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_j = i;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (examples[j].paragraph.ids == examples[i].paragraph.ids) continue;
            const double sim = mode == NegMode::Tfidf
                                   ? tfidf_cosine(tfidf_reprs[i], tfidf_reprs[j])
                                   : dense_reprs[i].dot(dense_reprs[j]);
            if (sim > best) {
                best = sim;
                best_j = j;
            }
        }
        pairing[i] = best_j;  // stays i when every other paragraph matches ours
    }
    return pairing;
}

std::vector<double> negative_tfidf_logits(const TrainingExample& ex, const TfidfStats& stats,
                                          const Vocabulary& vocab, double coeff) {
    std::vector<double> out(ex.paragraph.size(), 0.0);
    if (ex.negative_begin < 0) return out;

    std::unordered_set<TokenId> question_terms;
    for (TokenId t : ex.question.ids)
        if (!vocab.is_special(t)) question_terms.insert(t);

    std::unordered_map<TokenId, std::uint64_t> neg_counts;
    for (std::size_t p = static_cast<std::size_t>(ex.negative_begin); p < ex.paragraph.size(); ++p) {
        const TokenId t = ex.paragraph.ids[p];
        if (!vocab.is_special(t)) ++neg_counts[t];
    }

    for (std::size_t p = static_cast<std::size_t>(ex.negative_begin); p < ex.paragraph.size(); ++p) {
        const TokenId t = ex.paragraph.ids[p];
        if (vocab.is_special(t) || question_terms.count(t) == 0) continue;
        const double tf = 1.0 + std::log(static_cast<double>(neg_counts[t]));
        out[p] = coeff * tf * stats.idf(t);
    }
    return out;
}

TrainingExample attach_negative(const TrainingExample& base, const TrainingExample& partner,
                                const Vocabulary& vocab, const TfidfStats& stats, double coeff) {
    TrainingExample ex = base;
    ex.negative_begin = static_cast<std::int64_t>(base.paragraph.size());
    ex.paragraph.ids.push_back(vocab.pad_id);
    ex.paragraph.char_begin.push_back(0);
    ex.paragraph.char_end.push_back(0);
    for (std::size_t i = 0; i < partner.paragraph.size(); ++i) {
        ex.paragraph.ids.push_back(partner.paragraph.ids[i]);
        ex.paragraph.char_begin.push_back(partner.paragraph.char_begin[i]);
        ex.paragraph.char_end.push_back(partner.paragraph.char_end[i]);
    }
    if (coeff != 0.0) {
        ex.extra_start_logits = negative_tfidf_logits(ex, stats, vocab, coeff);
        ex.extra_end_logits = ex.extra_start_logits;
    }
    return ex;
}

namespace {

struct AdamState {
    std::vector<std::vector<double>> m, v;
    std::uint64_t t = 0;
};

void adam_step(std::vector<TensorRef>& params, std::vector<TensorRef>& grads, AdamState& state,
               double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++state.t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t k = 0; k < params[i].size; ++k) {
            const double g = grads[i].data[k];
            m[k] = beta1 * m[k] + (1.0 - beta1) * g;
            v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
            params[i].data[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps);
        }
    }
}

}  // namespace

TrainResult train(const std::vector<TrainingExample>& dataset, ModelParams& params,
                  const TrainConfig& cfg) {
    if (dataset.empty()) throw DataError("empty training dataset");
    if (cfg.lr < 0.0) throw UsageError("learning rate must be >= 0");
    if (cfg.epochs < 1) throw UsageError("epochs must be >= 1");
    if (cfg.batch_size < 1) throw UsageError("batch size must be >= 1");

    std::vector<std::vector<TokenId>> paragraphs(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) paragraphs[i] = dataset[i].paragraph.ids;
    const TfidfStats stats = compute_tfidf_stats(paragraphs, params.vocab);

    auto tensors = trainable_tensors(params);
    AdamState adam;
    adam.m.resize(tensors.size());
    adam.v.resize(tensors.size());
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        adam.m[i].assign(tensors[i].size, 0.0);
        adam.v[i].assign(tensors[i].size, 0.0);
    }

    Rng rng(cfg.seed);
    TrainResult result;
    std::uint64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto pairing = mine_negative(dataset, params, cfg.neg_mode);
        std::vector<std::size_t> order(dataset.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            const std::size_t batch_end = std::min(order.size(), b + cfg.batch_size);
            const std::size_t batch_n = batch_end - b;
            ++step;

            std::vector<TrainingExample> batch(batch_n);
            for (std::size_t k = 0; k < batch_n; ++k) {
                const std::size_t idx = order[b + k];
                batch[k] = (cfg.neg_mode != NegMode::None && pairing[idx] != idx)
                               ? attach_negative(dataset[idx], dataset[pairing[idx]],
                                                 params.vocab, stats, cfg.tfidf_coeff)
                               : dataset[idx];
            }

            // Per-example gradients land in slots, reduced in index order, so
            // the result is the same for any thread count.
            std::vector<ModelGrads> slots(batch_n);
            std::vector<double> losses(batch_n);
            std::vector<std::exception_ptr> failures(batch_n);
            parallel_for(batch_n, cfg.threads, [&](std::size_t k) {
                try {
                    slots[k] = zero_grads(params);
                    losses[k] =
                        loss_and_grads(batch[k], params, cfg.dense_only_weight, slots[k]).total;
                } catch (...) {
                    failures[k] = std::current_exception();
                }
            });
            for (std::size_t k = 0; k < batch_n; ++k) {
                if (!failures[k]) continue;
                try {
                    std::rethrow_exception(failures[k]);
                } catch (const std::exception& e) {
                    throw InternalError("training aborted at epoch " + std::to_string(epoch + 1) +
                                        ", step " + std::to_string(step) + ": " + e.what());
                }
            }

            ModelGrads grads = std::move(slots[0]);
            for (std::size_t k = 1; k < batch_n; ++k) add_grads(grads, slots[k]);
            for (std::size_t k = 0; k < batch_n; ++k) {
                if (!std::isfinite(losses[k]))
                    throw InternalError("training diverged: non-finite loss at epoch " +
                                        std::to_string(epoch + 1) + ", step " +
                                        std::to_string(step));
                epoch_loss += losses[k];
            }

            auto grad_refs = grad_tensors(grads);
            adam_step(tensors, grad_refs, adam, cfg.lr);
        }
        result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(dataset.size()));
    }
    return result;
}

}  // namespace sparc
