#include "sparc/model.hpp"

#include <json.hpp>

#include "sparc/bytes.hpp"
#include "sparc/errors.hpp"

namespace sparc {

namespace {

void write_mat(ByteWriter& w, const Mat& m) {
    w.u64(static_cast<std::uint64_t>(m.rows()));
    w.u64(static_cast<std::uint64_t>(m.cols()));
    w.raw(m.data(), sizeof(double) * m.size());
}

void write_vec(ByteWriter& w, const Vec& v) {
    w.u64(static_cast<std::uint64_t>(v.size()));
    w.u64(1);
    w.raw(v.data(), sizeof(double) * v.size());
}

Mat read_mat(ByteReader& r) {
    const auto rows = r.u64();
    const auto cols = r.u64();
    Mat m(rows, cols);
    r.raw(m.data(), sizeof(double) * m.size());
    return m;
}

Vec read_vec(ByteReader& r) {
    const Mat m = read_mat(r);
    if (m.cols() != 1) throw DataError("expected a vector in model file");
    return m.col(0);
}

std::string meta_json(const ModelConfig& cfg, std::size_t vocab_size) {
    nlohmann::json j{{"d", cfg.enc.d},
                     {"d_ff", cfg.enc.d_ff},
                     {"layers", cfg.enc.layers},
                     {"max_seq_len", cfg.enc.max_seq_len},
                     {"d_p", cfg.d_p},
                     {"orders", cfg.orders},
                     {"max_span_len", cfg.max_span_len},
                     {"seed", cfg.seed},
                     {"vocab_size", vocab_size}};
    return j.dump();
}

ModelConfig meta_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ModelConfig cfg;
    cfg.enc.d = j.at("d").get<int>();
    cfg.enc.d_ff = j.at("d_ff").get<int>();
    cfg.enc.layers = j.at("layers").get<int>();
    cfg.enc.max_seq_len = j.at("max_seq_len").get<int>();
    cfg.d_p = j.at("d_p").get<int>();
    cfg.orders = j.at("orders").get<std::vector<int>>();
    cfg.max_span_len = j.at("max_span_len").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

ByteWriter vocab_section(const Vocabulary& vocab) {
    ByteWriter w;
    w.u64(vocab.size());
    for (const auto& t : vocab.id_to_token) w.str(t);
    return w;
}

Vocabulary vocab_from_section(ByteReader r) {
    const auto n = r.u64();
    Vocabulary v;
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::string token = r.str();
        v.token_to_id.emplace(token, static_cast<TokenId>(v.id_to_token.size()));
        v.id_to_token.push_back(token);
    }
    if (v.size() < 3) throw DataError("model vocabulary too small");
    return v;
}

ByteWriter tensor_section(const ModelParams& p) {
    ByteWriter w;
    write_mat(w, p.encoder.embeddings);
    for (const auto& l : p.encoder.layers) {
        write_mat(w, l.wq);
        write_mat(w, l.wk);
        write_mat(w, l.wv);
        write_mat(w, l.w1);
        write_vec(w, l.b1);
        write_mat(w, l.w2);
        write_vec(w, l.b2);
        write_vec(w, l.ln1_gamma);
        write_vec(w, l.ln1_beta);
        write_vec(w, l.ln2_gamma);
        write_vec(w, l.ln2_beta);
    }
    for (const auto& role_heads : p.sparc.heads)
        for (const auto& h : role_heads) {
            write_mat(w, h.wq);
            write_mat(w, h.wk);
        }
    write_mat(w, p.dense.doc_start);
    write_mat(w, p.dense.doc_end);
    write_mat(w, p.dense.q_start);
    write_mat(w, p.dense.q_end);
    return w;
}

}  // namespace

ModelParams init_model(const ModelConfig& cfg, Vocabulary vocab) {
    ModelParams p;
    p.cfg = cfg;
    p.vocab = std::move(vocab);
    // Distinct seed streams per component keep init order-independent.
    p.encoder = init_encoder(cfg.enc, static_cast<std::uint32_t>(p.vocab.size()), cfg.seed);
    p.sparc = init_sparc(cfg.enc.d, cfg.orders, cfg.seed + 1);
    p.dense = init_dense_phrase(cfg.enc.d, cfg.d_p, cfg.seed + 2);
    return p;
}

ModelGrads zero_grads(const ModelParams& params) {
    ModelGrads g;
    g.encoder = zero_encoder_grads(params.encoder);
    for (int role = 0; role < 2; ++role) {
        g.sparc[role].resize(params.sparc.orders.size());
        for (auto& h : g.sparc[role]) {
            h.wq = Mat::Zero(params.sparc.d, params.sparc.d);
            h.wk = Mat::Zero(params.sparc.d, params.sparc.d);
        }
    }
    g.dense_doc_start = Mat::Zero(params.dense.doc_start.rows(), params.dense.doc_start.cols());
    g.dense_doc_end = Mat::Zero(params.dense.doc_end.rows(), params.dense.doc_end.cols());
    g.dense_q_start = Mat::Zero(params.dense.q_start.rows(), params.dense.q_start.cols());
    g.dense_q_end = Mat::Zero(params.dense.q_end.rows(), params.dense.q_end.cols());
    return g;
}

void scale_grads(ModelGrads& g, double factor) {
    for (auto& t : grad_tensors(g))
        for (std::size_t i = 0; i < t.size; ++i) t.data[i] *= factor;
}

void add_grads(ModelGrads& into, const ModelGrads& from) {
    auto dst = grad_tensors(into);
    auto src = grad_tensors(const_cast<ModelGrads&>(from));
    if (dst.size() != src.size()) throw InternalError("gradient structure mismatch");
    for (std::size_t t = 0; t < dst.size(); ++t) {
        if (dst[t].size != src[t].size) throw InternalError("gradient tensor size mismatch");
        for (std::size_t i = 0; i < dst[t].size; ++i) dst[t].data[i] += src[t].data[i];
    }
}

namespace {

template <typename EncLayers, typename SparcHeadsArr, typename MatT>
std::vector<TensorRef> tensor_refs(EncLayers& enc_layers, SparcHeadsArr& sparc_heads,
                                   const std::vector<int>& orders, MatT& dds, MatT& dde, MatT& dqs,
                                   MatT& dqe) {
    std::vector<TensorRef> refs;
    auto add = [&refs](const std::string& name, auto& m) {
        refs.push_back({name, m.data(), static_cast<std::size_t>(m.size())});
    };
    for (std::size_t l = 0; l < enc_layers.size(); ++l) {
        const std::string pre = "enc.l" + std::to_string(l) + ".";
        add(pre + "wq", enc_layers[l].wq);
        add(pre + "wk", enc_layers[l].wk);
        add(pre + "wv", enc_layers[l].wv);
        add(pre + "w1", enc_layers[l].w1);
        add(pre + "b1", enc_layers[l].b1);
        add(pre + "w2", enc_layers[l].w2);
        add(pre + "b2", enc_layers[l].b2);
        add(pre + "ln1_gamma", enc_layers[l].ln1_gamma);
        add(pre + "ln1_beta", enc_layers[l].ln1_beta);
        add(pre + "ln2_gamma", enc_layers[l].ln2_gamma);
        add(pre + "ln2_beta", enc_layers[l].ln2_beta);
    }
    for (int role = 0; role < 2; ++role) {
        for (std::size_t o = 0; o < sparc_heads[role].size(); ++o) {
            const std::string pre = std::string("sparc.") + (role == 0 ? "start" : "end") + ".o" +
                                    std::to_string(o < orders.size() ? orders[o] : int(o)) + ".";
            add(pre + "wq", sparc_heads[role][o].wq);
            add(pre + "wk", sparc_heads[role][o].wk);
        }
    }
    add("dense.doc_start", dds);
    add("dense.doc_end", dde);
    add("dense.q_start", dqs);
    add("dense.q_end", dqe);
    return refs;
}

}  // namespace

std::vector<TensorRef> trainable_tensors(ModelParams& params) {
    return tensor_refs(params.encoder.layers, params.sparc.heads, params.sparc.orders,
                       params.dense.doc_start, params.dense.doc_end, params.dense.q_start,
                       params.dense.q_end);
}

std::vector<TensorRef> grad_tensors(ModelGrads& grads) {
    std::vector<int> orders;  // names only; sizes match by construction
    for (std::size_t o = 0; o < grads.sparc[0].size(); ++o) orders.push_back(static_cast<int>(o));
    return tensor_refs(grads.encoder.layers, grads.sparc, orders, grads.dense_doc_start,
                       grads.dense_doc_end, grads.dense_q_start, grads.dense_q_end);
}

std::uint64_t model_hash(const ModelParams& params) {
    Fnv1a h;
    h.update_str(meta_json(params.cfg, params.vocab.size()));
    const ByteWriter vs = vocab_section(params.vocab);
    h.update(vs.bytes().data(), vs.size());
    const ByteWriter ts = tensor_section(params);
    h.update(ts.bytes().data(), ts.size());
    return h.digest();
}

void save_model(const ModelParams& params, const std::string& path) {
    ByteWriter meta;
    meta.str(meta_json(params.cfg, params.vocab.size()));
    std::vector<std::pair<std::string, ByteWriter>> sections;
    sections.emplace_back("meta", std::move(meta));
    sections.emplace_back("vocab", vocab_section(params.vocab));
    sections.emplace_back("tensors", tensor_section(params));
    write_file_bytes(path, pack_container(kKindModel, sections));
}

ModelParams load_model(const std::string& path) {
    const Container c = open_container(path, kKindModel);
    ModelParams p;
    {
        ByteReader r = c.section("meta");
        p.cfg = meta_from_json(r.str());
    }
    p.vocab = vocab_from_section(c.section("vocab"));

    ByteReader r = c.section("tensors");
    p.encoder.cfg = p.cfg.enc;
    p.encoder.vocab_size = static_cast<std::uint32_t>(p.vocab.size());
    p.encoder.embeddings = read_mat(r);
    if (p.encoder.embeddings.rows() != static_cast<Eigen::Index>(p.vocab.size()) ||
        p.encoder.embeddings.cols() != p.cfg.enc.d)
        throw DataError("model file embedding shape mismatch");
    {
        // Positions are sinusoidal, so an init re-derives them exactly.
        EncoderParams fresh = init_encoder(p.cfg.enc, 1, 0);
        p.encoder.positional = std::move(fresh.positional);
    }
    p.encoder.layers.resize(p.cfg.enc.layers);
    for (auto& l : p.encoder.layers) {
        l.wq = read_mat(r);
        l.wk = read_mat(r);
        l.wv = read_mat(r);
        l.w1 = read_mat(r);
        l.b1 = read_vec(r);
        l.w2 = read_mat(r);
        l.b2 = read_vec(r);
        l.ln1_gamma = read_vec(r);
        l.ln1_beta = read_vec(r);
        l.ln2_gamma = read_vec(r);
        l.ln2_beta = read_vec(r);
    }
    p.sparc.d = p.cfg.enc.d;
    p.sparc.orders = p.cfg.orders;
    for (auto& role_heads : p.sparc.heads) {
        role_heads.resize(p.cfg.orders.size());
        for (auto& h : role_heads) {
            h.wq = read_mat(r);
            h.wk = read_mat(r);
        }
    }
    p.dense.doc_start = read_mat(r);
    p.dense.doc_end = read_mat(r);
    p.dense.q_start = read_mat(r);
    p.dense.q_end = read_mat(r);
    if (p.dense.doc_start.rows() != p.cfg.enc.d || p.dense.doc_start.cols() != p.cfg.d_p)
        throw DataError("model file dense head shape mismatch");
    return p;
}

}  // namespace sparc
