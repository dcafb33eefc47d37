#pragma once

#include <cstdint>
#include <vector>

#include "sparc/linalg.hpp"
#include "sparc/vocab.hpp"

namespace sparc {

struct EncoderConfig {
    int d = 64;
    int d_ff = 128;
    int layers = 2;
    int max_seq_len = 128;
};

/// One post-LN transformer block: single-head self-attention followed by a
/// position-wise feed-forward, each wrapped in residual + layer norm.
struct EncoderLayerParams {
    Mat wq, wk, wv;  // d x d
    Mat w1;          // d x d_ff
    Vec b1;          // d_ff
    Mat w2;          // d_ff x d
    Vec b2;          // d
    Vec ln1_gamma, ln1_beta;  // d
    Vec ln2_gamma, ln2_beta;  // d
};

struct EncoderParams {
    EncoderConfig cfg;
    std::uint32_t vocab_size = 0;
    Mat embeddings;  // V x d, frozen after init
    Mat positional;  // max_seq_len x d, fixed sinusoidal
    std::vector<EncoderLayerParams> layers;
};

/// Xavier-uniform projections, zero biases, unit layer-norm scales;
/// embeddings drawn once and never updated. Deterministic given seed.
EncoderParams init_encoder(const EncoderConfig& cfg, std::uint32_t vocab_size, std::uint64_t seed);

struct EncoderLayerCache {
    Mat x_in;
    Mat q, k, v;
    Mat probs;     // N x N softmax rows
    Mat r1;        // residual before LN1
    Mat x1_hat;    // LN1 output before affine rescale
    Vec inv_std1;
    Mat x1;
    Mat ff_pre;    // N x d_ff before ReLU
    Mat ff_act;
    Mat r2;
    Mat x2_hat;
    Vec inv_std2;
};

struct EncoderForward {
    Mat x0;  // embeddings + positions
    std::vector<EncoderLayerCache> layers;
    Mat h;   // N x d contextual encoding
};

/// Query-agnostic by construction: the signature admits no question input.
/// Throws DataError("sequence exceeds max length") when N > max_seq_len.
EncoderForward encoder_forward(const TokenSeq& tokens, const EncoderParams& params);

inline Mat encode(const TokenSeq& tokens, const EncoderParams& params) {
    return encoder_forward(tokens, params).h;
}

struct EncoderGrads {
    std::vector<EncoderLayerParams> layers;  // same shapes as the params
};

EncoderGrads zero_encoder_grads(const EncoderParams& params);

/// Accumulates dLoss/dParams into `grads` given dLoss/dH. Embeddings are
/// frozen, so the input gradient is dropped.
void encoder_backward(const EncoderParams& params, const EncoderForward& fwd, const Mat& d_h,
                      EncoderGrads& grads);

/// Row-wise layer norm pieces, exposed for the normalization property tests.
void layer_norm_rows(const Mat& x, Mat& x_hat, Vec& inv_std);

}  // namespace sparc
