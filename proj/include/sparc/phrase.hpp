#pragma once

#include <cstdint>
#include <vector>

#include "sparc/linalg.hpp"

namespace sparc {

/// Dense phrase heads. A phrase vector is the concatenation of its
/// transformed start and end hidden states; the question side maps the
/// [CLS] encoding to h' = [q_start; q_end].
struct DensePhraseParams {
    Mat doc_start, doc_end;  // d x d_p
    Mat q_start, q_end;      // d x d_p

    int d_p() const { return static_cast<int>(doc_start.cols()); }
};

DensePhraseParams init_dense_phrase(int d, int d_p, std::uint64_t seed);

struct SpanCandidate {
    std::uint32_t start = 0;
    std::uint32_t end = 0;  // inclusive
};

/// All (i, j) with i <= j, j - i < max_span_len and non-special endpoints,
/// in i-major order.
std::vector<SpanCandidate> enumerate_spans(std::size_t n, std::size_t max_span_len,
                                           const std::vector<bool>& special_mask);

/// Per-position dense word logits: start[i] = <doc_start^T h_i, q_start'>,
/// where q_start' is the question-head projection of the [CLS] encoding.
struct DenseWordLogits {
    Vec start;  // N
    Vec end;    // N
};

DenseWordLogits dense_word_logits(const Mat& h_doc, const Mat& h_q,
                                  const DensePhraseParams& params);

/// Full N x N matrix of span logits l_{i,j} = start[i] + end[j]; invalid
/// spans carry -inf.
Mat dense_phrase_logits(const Mat& h_doc, const Mat& h_q, const DensePhraseParams& params,
                        std::size_t max_span_len, const std::vector<bool>& special_mask);

/// Adds per-position sparse logits onto the dense span matrix; -inf entries
/// stay -inf.
Mat combined_logits(const Mat& dense, const Vec& sparse_start, const Vec& sparse_end);

}  // namespace sparc
