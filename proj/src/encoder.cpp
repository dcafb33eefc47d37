#include "sparc/encoder.hpp"

#include <cmath>

#include "sparc/errors.hpp"
#include "sparc/rng.hpp"

namespace sparc {

namespace {

constexpr double kLnEps = 1e-9;

Mat xavier(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
    return m;
}

Mat sinusoidal_positions(int max_len, int d) {
    Mat p(max_len, d);
    for (int pos = 0; pos < max_len; ++pos) {
        for (int i = 0; i < d / 2; ++i) {
            const double rate = std::pow(10000.0, -2.0 * i / d);
            p(pos, 2 * i) = std::sin(pos * rate);
            p(pos, 2 * i + 1) = std::cos(pos * rate);
        }
    }
    return p;
}

Mat softmax_rows(const Mat& scores) {
    Mat p(scores.rows(), scores.cols());
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const double m = scores.row(r).maxCoeff();
        p.row(r) = (scores.row(r).array() - m).exp();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

/// dScores for row-wise softmax: P o (dP - rowsum(dP o P)).
Mat softmax_rows_backward(const Mat& probs, const Mat& d_probs) {
    const Vec dot = (d_probs.array() * probs.array()).rowwise().sum();
    return probs.array() * (d_probs.colwise() - dot).array();
}

/// Backward through y = gamma o x_hat + beta, accumulating affine grads.
Mat layer_norm_backward(const Mat& d_y, const Mat& x_hat, const Vec& inv_std, const Vec& gamma,
                        Vec& d_gamma, Vec& d_beta) {
    d_gamma += (d_y.array() * x_hat.array()).colwise().sum().transpose().matrix();
    d_beta += d_y.colwise().sum().transpose();
    const Mat d_hat = d_y.array().rowwise() * gamma.transpose().array();
    const Vec mean_d = d_hat.rowwise().mean();
    const Vec mean_dx = (d_hat.array() * x_hat.array()).rowwise().mean();
    Mat d_x = d_hat;
    d_x.colwise() -= mean_d;
    d_x -= (x_hat.array().colwise() * mean_dx.array()).matrix();
    d_x.array().colwise() *= inv_std.array();
    return d_x;
}

}  // namespace

void layer_norm_rows(const Mat& x, Mat& x_hat, Vec& inv_std) {
    const Eigen::Index n = x.rows(), d = x.cols();
    x_hat.resize(n, d);
    inv_std.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        inv_std(r) = 1.0 / std::sqrt(var + kLnEps);
        x_hat.row(r) = (x.row(r).array() - mean) * inv_std(r);
    }
}

EncoderParams init_encoder(const EncoderConfig& cfg, std::uint32_t vocab_size, std::uint64_t seed) {
    if (cfg.d < 1 || cfg.d_ff < 1 || cfg.layers < 0 || cfg.max_seq_len < 1)
        throw UsageError("bad encoder config");
    if (cfg.d % 2 != 0) throw UsageError("encoder width d must be even for sinusoidal positions");

    Rng rng(seed);
    EncoderParams p;
    p.cfg = cfg;
    p.vocab_size = vocab_size;
    p.embeddings.resize(vocab_size, cfg.d);
    for (Eigen::Index r = 0; r < p.embeddings.rows(); ++r)
        for (int c = 0; c < cfg.d; ++c) p.embeddings(r, c) = rng.uniform(-0.5, 0.5);
    p.positional = sinusoidal_positions(cfg.max_seq_len, cfg.d);

    p.layers.resize(cfg.layers);
    for (auto& layer : p.layers) {
        layer.wq = xavier(cfg.d, cfg.d, rng);
        layer.wk = xavier(cfg.d, cfg.d, rng);
        layer.wv = xavier(cfg.d, cfg.d, rng);
        layer.w1 = xavier(cfg.d, cfg.d_ff, rng);
        layer.b1 = Vec::Zero(cfg.d_ff);
        layer.w2 = xavier(cfg.d_ff, cfg.d, rng);
        layer.b2 = Vec::Zero(cfg.d);
        layer.ln1_gamma = Vec::Ones(cfg.d);
        layer.ln1_beta = Vec::Zero(cfg.d);
        layer.ln2_gamma = Vec::Ones(cfg.d);
        layer.ln2_beta = Vec::Zero(cfg.d);
    }
    return p;
}

EncoderForward encoder_forward(const TokenSeq& tokens, const EncoderParams& params) {
    const auto n = static_cast<Eigen::Index>(tokens.size());
    if (n > params.cfg.max_seq_len) throw DataError("sequence exceeds max length");
    const int d = params.cfg.d;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    EncoderForward fwd;
    fwd.x0.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        fwd.x0.row(i) = params.embeddings.row(tokens.ids[i]) + params.positional.row(i);

    Mat x = fwd.x0;
    fwd.layers.resize(params.layers.size());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& w = params.layers[l];
        auto& c = fwd.layers[l];
        c.x_in = x;
        c.q = x * w.wq;
        c.k = x * w.wk;
        c.v = x * w.wv;
        c.probs = softmax_rows(c.q * c.k.transpose() * scale);
        c.r1 = x + c.probs * c.v;
        layer_norm_rows(c.r1, c.x1_hat, c.inv_std1);
        c.x1 = (c.x1_hat.array().rowwise() * w.ln1_gamma.transpose().array()).matrix();
        c.x1.rowwise() += w.ln1_beta.transpose();
        c.ff_pre = (c.x1 * w.w1).rowwise() + w.b1.transpose();
        c.ff_act = c.ff_pre.cwiseMax(0.0);
        c.r2 = c.x1 + ((c.ff_act * w.w2).rowwise() + w.b2.transpose());
        layer_norm_rows(c.r2, c.x2_hat, c.inv_std2);
        x = (c.x2_hat.array().rowwise() * w.ln2_gamma.transpose().array()).matrix();
        x.rowwise() += w.ln2_beta.transpose();
    }
    fwd.h = std::move(x);
    if (!all_finite(fwd.h)) throw InternalError("encoder produced non-finite values");
    return fwd;
}

EncoderGrads zero_encoder_grads(const EncoderParams& params) {
    EncoderGrads g;
    g.layers.resize(params.layers.size());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& w = params.layers[l];
        auto& gl = g.layers[l];
        gl.wq = Mat::Zero(w.wq.rows(), w.wq.cols());
        gl.wk = Mat::Zero(w.wk.rows(), w.wk.cols());
        gl.wv = Mat::Zero(w.wv.rows(), w.wv.cols());
        gl.w1 = Mat::Zero(w.w1.rows(), w.w1.cols());
        gl.b1 = Vec::Zero(w.b1.size());
        gl.w2 = Mat::Zero(w.w2.rows(), w.w2.cols());
        gl.b2 = Vec::Zero(w.b2.size());
        gl.ln1_gamma = Vec::Zero(w.ln1_gamma.size());
        gl.ln1_beta = Vec::Zero(w.ln1_beta.size());
        gl.ln2_gamma = Vec::Zero(w.ln2_gamma.size());
        gl.ln2_beta = Vec::Zero(w.ln2_beta.size());
    }
    return g;
}

void encoder_backward(const EncoderParams& params, const EncoderForward& fwd, const Mat& d_h,
                      EncoderGrads& grads) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.cfg.d));
    Mat d_x = d_h;
    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const auto& w = params.layers[li];
        const auto& c = fwd.layers[li];
        auto& g = grads.layers[li];

        // x2 = LN2(r2)
        Mat d_r2 = layer_norm_backward(d_x, c.x2_hat, c.inv_std2, w.ln2_gamma, g.ln2_gamma,
                                       g.ln2_beta);
        // r2 = x1 + ff_act * w2 + b2
        Mat d_x1 = d_r2;
        g.w2 += c.ff_act.transpose() * d_r2;
        g.b2 += d_r2.colwise().sum().transpose();
        Mat d_act = d_r2 * w.w2.transpose();
        Mat d_pre = (c.ff_pre.array() > 0.0).select(d_act, 0.0);
        g.w1 += c.x1.transpose() * d_pre;
        g.b1 += d_pre.colwise().sum().transpose();
        d_x1 += d_pre * w.w1.transpose();

        // x1 = LN1(r1)
        Mat d_r1 = layer_norm_backward(d_x1, c.x1_hat, c.inv_std1, w.ln1_gamma, g.ln1_gamma,
                                       g.ln1_beta);
        // r1 = x_in + probs * v
        Mat d_x_in = d_r1;
        Mat d_probs = d_r1 * c.v.transpose();
        Mat d_v = c.probs.transpose() * d_r1;
        Mat d_scores = softmax_rows_backward(c.probs, d_probs);
        Mat d_q = d_scores * c.k * scale;
        Mat d_k = d_scores.transpose() * c.q * scale;
        g.wq += c.x_in.transpose() * d_q;
        g.wk += c.x_in.transpose() * d_k;
        g.wv += c.x_in.transpose() * d_v;
        d_x_in += d_q * w.wq.transpose() + d_k * w.wk.transpose() + d_v * w.wv.transpose();

        d_x = std::move(d_x_in);
    }
    // d_x now holds dLoss/dX0; embeddings are frozen, so it stops here.
}

}  // namespace sparc
