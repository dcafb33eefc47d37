#include "sparc/phrase.hpp"

#include <cmath>
#include <limits>

#include "sparc/errors.hpp"
#include "sparc/rng.hpp"

namespace sparc {

namespace {

Mat xavier(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
    return m;
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

DensePhraseParams init_dense_phrase(int d, int d_p, std::uint64_t seed) {
    if (d < 1 || d_p < 1) throw UsageError("bad dense phrase config");
    Rng rng(seed);
    DensePhraseParams p;
    p.doc_start = xavier(d, d_p, rng);
    p.doc_end = xavier(d, d_p, rng);
    p.q_start = xavier(d, d_p, rng);
    p.q_end = xavier(d, d_p, rng);
    return p;
}

std::vector<SpanCandidate> enumerate_spans(std::size_t n, std::size_t max_span_len,
                                           const std::vector<bool>& special_mask) {
    if (!special_mask.empty() && special_mask.size() != n)
        throw UsageError("special mask length mismatch");
    std::vector<SpanCandidate> spans;
    for (std::size_t i = 0; i < n; ++i) {
        if (!special_mask.empty() && special_mask[i]) continue;
        for (std::size_t j = i; j < n && j - i < max_span_len; ++j) {
            if (!special_mask.empty() && special_mask[j]) continue;
            spans.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
        }
    }
    return spans;
}

DenseWordLogits dense_word_logits(const Mat& h_doc, const Mat& h_q,
                                  const DensePhraseParams& params) {
    if (h_doc.cols() != params.doc_start.rows() || h_q.cols() != params.q_start.rows())
        throw UsageError("dense head dimension mismatch");
    const Vec q_s = (h_q.row(0) * params.q_start).transpose();
    const Vec q_e = (h_q.row(0) * params.q_end).transpose();
    DenseWordLogits out;
    out.start = h_doc * params.doc_start * q_s;
    out.end = h_doc * params.doc_end * q_e;
    return out;
}

Mat dense_phrase_logits(const Mat& h_doc, const Mat& h_q, const DensePhraseParams& params,
                        std::size_t max_span_len, const std::vector<bool>& special_mask) {
    const auto logits = dense_word_logits(h_doc, h_q, params);
    const auto n = static_cast<std::size_t>(h_doc.rows());
    Mat out = Mat::Constant(n, n, kNegInf);
    for (const auto& s : enumerate_spans(n, max_span_len, special_mask))
        out(s.start, s.end) = logits.start(s.start) + logits.end(s.end);
    return out;
}

Mat combined_logits(const Mat& dense, const Vec& sparse_start, const Vec& sparse_end) {
    if (dense.rows() != sparse_start.size() || dense.cols() != sparse_end.size())
        throw UsageError("combined logit shape mismatch");
    Mat out = dense;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            if (std::isfinite(out(i, j))) out(i, j) += sparse_start(i) + sparse_end(j);
    return out;
}

}  // namespace sparc
