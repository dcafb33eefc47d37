#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sparc/linalg.hpp"
#include "sparc/ngram.hpp"

namespace sparc {

enum class Role { Start = 0, End = 1 };
enum class Side { Document, Question };

/// Per-role, per-order query/key maps. Start and end use unshared parameters;
/// document and question sides share them.
struct SparcHead {
    Mat wq, wk;  // d x d
};

struct SparcParams {
    int d = 0;
    std::vector<int> orders;                      // e.g. {1, 2}
    std::array<std::vector<SparcHead>, 2> heads;  // [role][order index]

    const SparcHead& head(Role r, std::size_t order_idx) const {
        return heads[static_cast<int>(r)][order_idx];
    }
    SparcHead& head(Role r, std::size_t order_idx) {
        return heads[static_cast<int>(r)][order_idx];
    }
};

SparcParams init_sparc(int d, const std::vector<int>& orders, std::uint64_t seed);

/// Rectified attention rows: A = ReLU(Q K^T / sqrt(d)). Document side keeps
/// all N rows; the question side keeps only the [CLS] row (1 x M).
struct AttentionMatrix {
    Role role = Role::Start;
    int order = 1;
    Mat values;  // N x N, or 1 x M on the question side
};

AttentionMatrix attention(const Mat& h, const SparcParams& params, Role role,
                          std::size_t order_idx, Side side);

/// One row of S = A F: a weighted bag of n-grams with ids sorted ascending
/// and no explicit zeros. Weights are the 32-bit form that gets indexed.
struct SparseVector {
    Role role = Role::Start;
    int order = 1;
    std::uint32_t position = 0;
    std::vector<std::uint64_t> ids;
    std::vector<float> weights;

    std::size_t nnz() const { return ids.size(); }
};

/// Explicit sparse encoding of one position; index-build path only.
SparseVector sparse_encode(const AttentionMatrix& a, const NgramFeatureMatrix& f,
                           std::uint32_t position);

/// Inner product of two sorted sparse vectors, accumulated in double.
double sparse_dot(const SparseVector& a, const SparseVector& b);

/// Kernelized per-position sparse logits for one order: row i of
/// A_doc * kernel * a_q^T. This is the training/rerank path that never
/// touches the F-dimensional space.
std::vector<double> sparse_logits(const AttentionMatrix& a_doc, const AttentionMatrix& a_q,
                                  const MatchMatrix& kernel);

/// Forward cache for one (role, order) head over a document/question pair,
/// holding what the backward pass needs.
struct SparcHeadForward {
    Mat doc_q, doc_k;   // N x d
    Mat doc_z;          // N x N pre-ReLU scores
    Mat doc_a;          // N x N rectified
    Vec q_cls;          // question [CLS] row of H' W_q
    Mat question_k;     // M x d
    Vec q_z;            // M pre-ReLU [CLS] scores
    Vec q_a;            // M rectified
    Vec kernel_qa;      // N: kernel * q_a
    std::vector<double> logits;  // N: doc_a * kernel_qa
};

SparcHeadForward sparc_head_forward(const Mat& h_doc, const Mat& h_q, const SparcHead& head,
                                    const MatchMatrix& kernel);

struct SparcHeadGrads {
    Mat wq, wk;
};

/// Backward through the kernelized logits. d_logits is dLoss/d(per-position
/// sparse logit); gradients accumulate into g / d_h_doc / d_h_q. ReLU
/// subgradient at exactly 0 is 0.
void sparc_head_backward(const Mat& h_doc, const Mat& h_q, const SparcHead& head,
                         const MatchMatrix& kernel, const SparcHeadForward& fwd,
                         const std::vector<double>& d_logits, SparcHeadGrads& g, Mat& d_h_doc,
                         Mat& d_h_q);

}  // namespace sparc
