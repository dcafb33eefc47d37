#include "sparc/index.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "sparc/bytes.hpp"
#include "sparc/errors.hpp"
#include "sparc/ngram.hpp"
#include "sparc/parallel.hpp"

namespace sparc {

namespace {

struct Window {
    std::size_t token_begin;
    std::size_t token_count;
};

std::vector<Window> split_windows(std::size_t n_tokens, std::size_t max_len) {
    std::vector<Window> windows;
    if (n_tokens == 0) return windows;
    if (n_tokens <= max_len) {
        windows.push_back({0, n_tokens});
        return windows;
    }
    const std::size_t stride = std::max<std::size_t>(1, max_len / 2);
    for (std::size_t begin = 0;; begin += stride) {
        const std::size_t end = std::min(n_tokens, begin + max_len);
        windows.push_back({begin, end - begin});
        if (end == n_tokens) break;
    }
    return windows;
}

/// Keeps the k largest weights (ties broken toward smaller ids), restoring
/// id order afterwards. The comparison key is a total order, so the kept set
/// for k is a prefix of the kept set for any k' >= k.
void prune_top_k(SparseVector& v, std::uint32_t k) {
    if (k == 0 || v.nnz() <= k) return;
    std::vector<std::size_t> idx(v.nnz());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (v.weights[a] != v.weights[b]) return v.weights[a] > v.weights[b];
        return v.ids[a] < v.ids[b];
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v.ids[a] < v.ids[b]; });
    SparseVector pruned;
    pruned.role = v.role;
    pruned.order = v.order;
    pruned.position = v.position;
    for (std::size_t i : idx) {
        pruned.ids.push_back(v.ids[i]);
        pruned.weights.push_back(v.weights[i]);
    }
    v = std::move(pruned);
}

PostingsBlock to_csr(const std::vector<SparseVector>& per_position) {
    PostingsBlock block;
    block.offsets.reserve(per_position.size() + 1);
    block.offsets.push_back(0);
    for (const auto& v : per_position) {
        block.ids.insert(block.ids.end(), v.ids.begin(), v.ids.end());
        block.weights.insert(block.weights.end(), v.weights.begin(), v.weights.end());
        block.offsets.push_back(block.ids.size());
    }
    return block;
}

}  // namespace

std::vector<TfidfVector> doc_tfidf(const std::vector<CorpusDoc>& corpus,
                                   const Vocabulary& vocab) {
    if (corpus.empty()) throw DataError("empty corpus");
    std::vector<std::vector<TokenId>> tokens(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i)
        tokens[i] = tokenize(corpus[i].text, vocab, false).ids;
    const TfidfStats stats = compute_tfidf_stats(tokens, vocab);
    std::vector<TfidfVector> out(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i)
        out[i] = tfidf_vector(tokens[i], stats, vocab);
    return out;
}

PhraseIndex build_index(const std::vector<CorpusDoc>& corpus, const ModelParams& params,
                        const IndexBuildConfig& cfg) {
    PhraseIndex index;
    index.meta.model_hash = model_hash(params);
    index.meta.d = params.cfg.enc.d;
    index.meta.d_p = params.cfg.d_p;
    index.meta.max_span_len = params.cfg.max_span_len;
    index.meta.orders = params.cfg.orders;
    index.meta.prune_k = cfg.prune_k;
    index.meta.tfidf_unit = cfg.tfidf_unit;
    index.vocab = params.vocab;

    // Entries come out in document-id order whatever the input order.
    std::vector<std::size_t> doc_order(corpus.size());
    std::iota(doc_order.begin(), doc_order.end(), 0);
    std::stable_sort(doc_order.begin(), doc_order.end(), [&](std::size_t a, std::size_t b) {
        return corpus[a].id < corpus[b].id;
    });

    // Tokenize each record once; windows reference token ranges.
    std::vector<TokenSeq> doc_tokens(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i)
        doc_tokens[i] = tokenize(corpus[i].text, params.vocab, false);

    struct EntryPlan {
        std::size_t doc;
        Window window;
    };
    std::vector<EntryPlan> plans;
    const auto max_len = static_cast<std::size_t>(params.cfg.enc.max_seq_len);
    for (std::size_t i : doc_order)
        for (const auto& w : split_windows(doc_tokens[i].size(), max_len))
            plans.push_back({i, w});

    // tf-idf statistics over the configured unit.
    std::vector<std::vector<TokenId>> units;
    if (cfg.tfidf_unit == "window") {
        for (const auto& p : plans)
            units.emplace_back(doc_tokens[p.doc].ids.begin() + p.window.token_begin,
                               doc_tokens[p.doc].ids.begin() + p.window.token_begin +
                                   p.window.token_count);
    } else if (cfg.tfidf_unit == "record") {
        for (const auto& t : doc_tokens) units.push_back(t.ids);
    } else {
        throw UsageError("tfidf_unit must be 'record' or 'window'");
    }
    index.stats = compute_tfidf_stats(units, params.vocab);
    std::vector<TfidfVector> unit_vectors(units.size());
    for (std::size_t i = 0; i < units.size(); ++i)
        unit_vectors[i] = tfidf_vector(units[i], index.stats, params.vocab);

    index.entries.resize(plans.size());
    parallel_for(plans.size(), cfg.threads, [&](std::size_t pi) {
        const auto& plan = plans[pi];
        const CorpusDoc& doc = corpus[plan.doc];
        const TokenSeq& full = doc_tokens[plan.doc];
        IndexEntry& entry = index.entries[pi];
        entry.doc_id = doc.id;
        entry.title = doc.title;

        const std::size_t b = plan.window.token_begin;
        const std::size_t n = plan.window.token_count;
        entry.char_base = full.char_begin[b];
        const std::uint32_t slice_end = full.char_end[b + n - 1];
        entry.text = doc.text.substr(entry.char_base, slice_end - entry.char_base);

        TokenSeq window_seq;
        window_seq.is_question = false;
        for (std::size_t t = 0; t < n; ++t) {
            window_seq.ids.push_back(full.ids[b + t]);
            window_seq.char_begin.push_back(full.char_begin[b + t] -
                                            static_cast<std::uint32_t>(entry.char_base));
            window_seq.char_end.push_back(full.char_end[b + t] -
                                          static_cast<std::uint32_t>(entry.char_base));
        }
        entry.tok_begin = window_seq.char_begin;
        entry.tok_end = window_seq.char_end;
        entry.special.resize(n);
        for (std::size_t t = 0; t < n; ++t)
            entry.special[t] = params.vocab.is_special(window_seq.ids[t]) ? 1 : 0;

        const Mat h = encode(window_seq, params.encoder);
        entry.dense_start = (h * params.dense.doc_start).cast<float>();
        entry.dense_end = (h * params.dense.doc_end).cast<float>();

        for (int role = 0; role < 2; ++role) {
            entry.postings[role].resize(params.cfg.orders.size());
            for (std::size_t o = 0; o < params.cfg.orders.size(); ++o) {
                const auto feats =
                    ngram_features(window_seq, params.vocab, params.cfg.orders[o]);
                const AttentionMatrix a =
                    attention(h, params.sparc, static_cast<Role>(role), o, Side::Document);
                std::vector<SparseVector> rows;
                rows.reserve(n);
                for (std::uint32_t pos = 0; pos < n; ++pos) {
                    SparseVector v = sparse_encode(a, feats, pos);
                    prune_top_k(v, cfg.prune_k);
                    rows.push_back(std::move(v));
                }
                entry.postings[role][o] = to_csr(rows);
            }
        }

        entry.tfidf = cfg.tfidf_unit == "window" ? unit_vectors[pi] : unit_vectors[plan.doc];
    });

    return index;
}

namespace {

void write_matf(ByteWriter& w, const MatF& m) {
    w.u64(static_cast<std::uint64_t>(m.rows()));
    w.u64(static_cast<std::uint64_t>(m.cols()));
    w.raw(m.data(), sizeof(float) * m.size());
}

MatF read_matf(ByteReader& r) {
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (rows > 0 && cols > 0 && rows * cols / cols != rows)
        throw DataError("index matrix shape overflow");
    MatF m(rows, cols);
    r.raw(m.data(), sizeof(float) * m.size());
    return m;
}

ByteWriter vocab_section(const Vocabulary& vocab) {
    ByteWriter w;
    w.u64(vocab.size());
    for (const auto& t : vocab.id_to_token) w.str(t);
    return w;
}

}  // namespace

void save_index(const PhraseIndex& index, const std::string& path) {
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(index.meta.model_hash));
    nlohmann::json meta{{"model_hash", std::string(hash_hex)},
                        {"d", index.meta.d},
                        {"d_p", index.meta.d_p},
                        {"max_span_len", index.meta.max_span_len},
                        {"orders", index.meta.orders},
                        {"prune_k", index.meta.prune_k},
                        {"tfidf_unit", index.meta.tfidf_unit},
                        {"n_entries", index.entries.size()},
                        {"vocab_size", index.vocab.size()}};
    ByteWriter meta_w;
    meta_w.str(meta.dump());

    ByteWriter docs;
    docs.u64(index.entries.size());
    for (const auto& e : index.entries) {
        docs.str(e.doc_id);
        docs.str(e.title);
        docs.u64(e.char_base);
        docs.str(e.text);
        docs.array(e.tok_begin);
        docs.array(e.tok_end);
        docs.array(e.special);
    }

    ByteWriter dense;
    for (const auto& e : index.entries) {
        write_matf(dense, e.dense_start);
        write_matf(dense, e.dense_end);
    }

    ByteWriter posts;
    for (const auto& e : index.entries)
        for (const auto& role_blocks : e.postings)
            for (const auto& block : role_blocks) {
                posts.array(block.offsets);
                posts.array(block.ids);
                posts.array(block.weights);
            }

    ByteWriter tfidf;
    tfidf.u64(index.stats.num_docs);
    std::vector<std::pair<TokenId, std::uint32_t>> df(index.stats.df.begin(),
                                                      index.stats.df.end());
    std::sort(df.begin(), df.end());
    tfidf.u64(df.size());
    for (const auto& [id, count] : df) {
        tfidf.u32(id);
        tfidf.u32(count);
    }
    for (const auto& e : index.entries) {
        tfidf.array(e.tfidf.ids);
        tfidf.array(e.tfidf.weights);
    }

    std::vector<std::pair<std::string, ByteWriter>> sections;
    sections.emplace_back("meta", std::move(meta_w));
    sections.emplace_back("vocab", vocab_section(index.vocab));
    sections.emplace_back("docs", std::move(docs));
    sections.emplace_back("dense", std::move(dense));
    sections.emplace_back("posts", std::move(posts));
    sections.emplace_back("tfidf", std::move(tfidf));
    write_file_bytes(path, pack_container(kKindIndex, sections));
}

PhraseIndex load_index(const std::string& path) {
    const Container c = open_container(path, kKindIndex);
    PhraseIndex index;

    std::size_t n_entries = 0;
    {
        ByteReader r = c.section("meta");
        const auto j = nlohmann::json::parse(r.str());
        index.meta.model_hash =
            std::stoull(j.at("model_hash").get<std::string>(), nullptr, 16);
        index.meta.d = j.at("d").get<int>();
        index.meta.d_p = j.at("d_p").get<int>();
        index.meta.max_span_len = j.at("max_span_len").get<int>();
        index.meta.orders = j.at("orders").get<std::vector<int>>();
        index.meta.prune_k = j.at("prune_k").get<std::uint32_t>();
        index.meta.tfidf_unit = j.at("tfidf_unit").get<std::string>();
        n_entries = j.at("n_entries").get<std::size_t>();
    }
    {
        ByteReader r = c.section("vocab");
        const auto n = r.u64();
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::string token = r.str();
            index.vocab.token_to_id.emplace(token,
                                            static_cast<TokenId>(index.vocab.id_to_token.size()));
            index.vocab.id_to_token.push_back(token);
        }
    }
    {
        ByteReader r = c.section("docs");
        const auto n = r.u64();
        if (n != n_entries) throw DataError("index entry count mismatch");
        index.entries.resize(n);
        for (auto& e : index.entries) {
            e.doc_id = r.str();
            e.title = r.str();
            e.char_base = r.u64();
            e.text = r.str();
            e.tok_begin = r.array<std::uint32_t>();
            e.tok_end = r.array<std::uint32_t>();
            e.special = r.array<std::uint8_t>();
        }
    }
    {
        ByteReader r = c.section("dense");
        for (auto& e : index.entries) {
            e.dense_start = read_matf(r);
            e.dense_end = read_matf(r);
        }
    }
    {
        ByteReader r = c.section("posts");
        for (auto& e : index.entries)
            for (auto& role_blocks : e.postings) {
                role_blocks.resize(index.meta.orders.size());
                for (auto& block : role_blocks) {
                    block.offsets = r.array<std::uint64_t>();
                    block.ids = r.array<std::uint64_t>();
                    block.weights = r.array<float>();
                    if (block.offsets.size() != e.n_tokens() + 1)
                        throw DataError("index postings offsets mismatch");
                }
            }
    }
    {
        ByteReader r = c.section("tfidf");
        index.stats.num_docs = r.u64();
        const auto n_df = r.u64();
        for (std::uint64_t i = 0; i < n_df; ++i) {
            const TokenId id = r.u32();
            const std::uint32_t count = r.u32();
            index.stats.df.emplace(id, count);
        }
        for (auto& e : index.entries) {
            e.tfidf.ids = r.array<TokenId>();
            e.tfidf.weights = r.array<float>();
        }
    }
    return index;
}

bool index_equal(const PhraseIndex& a, const PhraseIndex& b) {
    auto mat_eq = [](const MatF& x, const MatF& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() &&
               std::memcmp(x.data(), y.data(), sizeof(float) * x.size()) == 0;
    };
    if (a.meta.model_hash != b.meta.model_hash || a.meta.d != b.meta.d ||
        a.meta.d_p != b.meta.d_p || a.meta.max_span_len != b.meta.max_span_len ||
        a.meta.orders != b.meta.orders || a.meta.prune_k != b.meta.prune_k ||
        a.meta.tfidf_unit != b.meta.tfidf_unit)
        return false;
    if (a.vocab.id_to_token != b.vocab.id_to_token) return false;
    if (a.stats.num_docs != b.stats.num_docs || a.stats.df != b.stats.df) return false;
    if (a.entries.size() != b.entries.size()) return false;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        const auto& x = a.entries[i];
        const auto& y = b.entries[i];
        if (x.doc_id != y.doc_id || x.title != y.title || x.char_base != y.char_base ||
            x.text != y.text || x.tok_begin != y.tok_begin || x.tok_end != y.tok_end ||
            x.special != y.special)
            return false;
        if (!mat_eq(x.dense_start, y.dense_start) || !mat_eq(x.dense_end, y.dense_end))
            return false;
        for (int role = 0; role < 2; ++role) {
            if (x.postings[role].size() != y.postings[role].size()) return false;
            for (std::size_t o = 0; o < x.postings[role].size(); ++o) {
                const auto& p = x.postings[role][o];
                const auto& q = y.postings[role][o];
                if (p.offsets != q.offsets || p.ids != q.ids) return false;
                if (p.weights.size() != q.weights.size() ||
                    std::memcmp(p.weights.data(), q.weights.data(),
                                sizeof(float) * p.weights.size()) != 0)
                    return false;
            }
        }
        if (x.tfidf.ids != y.tfidf.ids ||
            x.tfidf.weights.size() != y.tfidf.weights.size() ||
            std::memcmp(x.tfidf.weights.data(), y.tfidf.weights.data(),
                        sizeof(float) * x.tfidf.weights.size()) != 0)
            return false;
    }
    return true;
}

}  // namespace sparc
