#include <doctest.h>

#include "sparc/encoder.hpp"
#include "sparc/errors.hpp"
#include "test_util.hpp"

using namespace sparc;

namespace {

std::vector<TensorRef> layer_tensor_refs(EncoderParams& p) {
    std::vector<TensorRef> refs;
    auto add = [&refs](const std::string& name, auto& m) {
        refs.push_back({name, m.data(), static_cast<std::size_t>(m.size())});
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& w = p.layers[l];
        const std::string pre = "l" + std::to_string(l) + ".";
        add(pre + "wq", w.wq);
        add(pre + "wk", w.wk);
        add(pre + "wv", w.wv);
        add(pre + "w1", w.w1);
        add(pre + "b1", w.b1);
        add(pre + "w2", w.w2);
        add(pre + "b2", w.b2);
        add(pre + "ln1_gamma", w.ln1_gamma);
        add(pre + "ln1_beta", w.ln1_beta);
        add(pre + "ln2_gamma", w.ln2_gamma);
        add(pre + "ln2_beta", w.ln2_beta);
    }
    return refs;
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("init is deterministic and seed-sensitive") {
    EncoderConfig cfg;
    cfg.d = 32;
    cfg.d_ff = 48;
    cfg.layers = 2;
    const EncoderParams a = init_encoder(cfg, 20, 7);
    const EncoderParams b = init_encoder(cfg, 20, 7);
    const EncoderParams c = init_encoder(cfg, 20, 8);
    CHECK(a.embeddings == b.embeddings);
    CHECK(a.layers[0].wq == b.layers[0].wq);
    CHECK(a.layers[1].w2 == b.layers[1].w2);
    CHECK(a.layers[0].wq != c.layers[0].wq);
}

TEST_CASE("parameter shapes") {
    EncoderConfig cfg;
    cfg.d = 16;
    cfg.d_ff = 24;
    cfg.layers = 3;
    cfg.max_seq_len = 40;
    const EncoderParams p = init_encoder(cfg, 11, 0);
    CHECK(p.embeddings.rows() == 11);
    CHECK(p.embeddings.cols() == 16);
    CHECK(p.positional.rows() == 40);
    REQUIRE(p.layers.size() == 3);
    for (const auto& l : p.layers) {
        CHECK(l.wq.rows() == 16);
        CHECK(l.w1.cols() == 24);
        CHECK(l.w2.rows() == 24);
        CHECK(l.b1.size() == 24);
        CHECK(l.ln2_gamma.size() == 16);
    }
}

TEST_CASE("odd width rejected") {
    EncoderConfig cfg;
    cfg.d = 7;
    CHECK_THROWS_AS(init_encoder(cfg, 5, 0), UsageError);
}

TEST_CASE("encode is deterministic") {
    EncoderConfig cfg;
    cfg.d = 16;
    cfg.d_ff = 20;
    cfg.layers = 2;
    const EncoderParams p = init_encoder(cfg, 9, 3);
    const TokenSeq tokens = testutil::seq_of({3, 5, 4, 3});
    CHECK(encode(tokens, p) == encode(tokens, p));
}

TEST_CASE("zero layers reduces to embeddings plus positions") {
    EncoderConfig cfg;
    cfg.d = 8;
    cfg.layers = 0;
    const EncoderParams p = init_encoder(cfg, 6, 1);
    const TokenSeq tokens = testutil::seq_of({3, 5, 4});
    const Mat h = encode(tokens, p);
    for (int i = 0; i < 3; ++i) {
        const Mat expected = p.embeddings.row(tokens.ids[i]) + p.positional.row(i);
        CHECK((h.row(i) - expected).norm() == 0.0);
    }
}

TEST_CASE("position matters: swapping distinct tokens changes H") {
    EncoderConfig cfg;
    cfg.d = 8;
    cfg.d_ff = 12;
    cfg.layers = 1;
    const EncoderParams p = init_encoder(cfg, 8, 5);
    const Mat h1 = encode(testutil::seq_of({3, 4, 5}), p);
    const Mat h2 = encode(testutil::seq_of({4, 3, 5}), p);
    CHECK((h1 - h2).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("sequence length limit") {
    EncoderConfig cfg;
    cfg.d = 8;
    cfg.max_seq_len = 4;
    const EncoderParams p = init_encoder(cfg, 6, 0);
    CHECK_THROWS_WITH_AS(encode(testutil::seq_of({3, 3, 3, 3, 3}), p),
                         "sequence exceeds max length", DataError);
}

TEST_CASE("layer norm rows have zero mean and unit variance pre-affine") {
    Rng rng(13);
    const Mat x = testutil::random_mat(10, 24, rng, 2.0);
    Mat x_hat;
    Vec inv_std;
    layer_norm_rows(x, x_hat, inv_std);
    for (int r = 0; r < 10; ++r) {
        CHECK(std::abs(x_hat.row(r).mean()) < 1e-6);
        const double var = (x_hat.row(r).array() - x_hat.row(r).mean()).square().mean();
        CHECK(std::abs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("analytic gradients of sum(H) match finite differences") {
    EncoderConfig cfg;
    cfg.d = 6;
    cfg.d_ff = 8;
    cfg.layers = 2;
    EncoderParams p = init_encoder(cfg, 7, 21);
    const TokenSeq tokens = testutil::seq_of({3, 5, 4, 6, 3});

    EncoderGrads grads = zero_encoder_grads(p);
    {
        const EncoderForward fwd = encoder_forward(tokens, p);
        encoder_backward(p, fwd, Mat::Ones(fwd.h.rows(), fwd.h.cols()), grads);
    }
    EncoderParams grads_view = p;  // same shapes; copy params then overwrite with grads
    grads_view.layers = grads.layers;

    auto probe = [&] { return encode(tokens, p).sum(); };
    constexpr double eps = 1e-5;
    auto param_refs = layer_tensor_refs(p);
    auto grad_refs = layer_tensor_refs(grads_view);
    for (std::size_t t = 0; t < param_refs.size(); ++t) {
        for (std::size_t i = 0; i < param_refs[t].size; ++i) {
            double& w = param_refs[t].data[i];
            const double saved = w;
            w = saved + eps;
            const double up = probe();
            w = saved - eps;
            const double down = probe();
            w = saved;
            const double fd = (up - down) / (2 * eps);
            CAPTURE(param_refs[t].name);
            CAPTURE(i);
            CHECK(testutil::rel_err(grad_refs[t].data[i], fd) < 1e-4);
        }
    }
}

}  // TEST_SUITE
