#include "sparc/search.hpp"

#include <algorithm>
#include <cmath>

#include "sparc/errors.hpp"
#include "sparc/ngram.hpp"
#include "sparc/parallel.hpp"
#include "sparc/phrase.hpp"

namespace sparc {

Strategy strategy_from_name(const std::string& name) {
    if (name == "sfs") return Strategy::SFS;
    if (name == "dfs") return Strategy::DFS;
    if (name == "hybrid") return Strategy::Hybrid;
    if (name == "exhaustive") return Strategy::Exhaustive;
    throw UsageError("unknown strategy: " + name);
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::SFS: return "sfs";
        case Strategy::DFS: return "dfs";
        case Strategy::Hybrid: return "hybrid";
        case Strategy::Exhaustive: return "exhaustive";
    }
    return "?";
}

QueryArtifacts make_query_artifacts(const std::string& question, const ModelParams& params,
                                    const PhraseIndex& index) {
    const TokenSeq tokens = tokenize(question, params.vocab, true);
    const Mat h = encode(tokens, params.encoder);

    QueryArtifacts q;
    q.model_hash = model_hash(params);
    q.q_start = (h.row(0) * params.dense.q_start).transpose();
    q.q_end = (h.row(0) * params.dense.q_end).transpose();
    for (int role = 0; role < 2; ++role) {
        for (std::size_t o = 0; o < params.cfg.orders.size(); ++o) {
            const auto feats = ngram_features(tokens, params.vocab, params.cfg.orders[o]);
            const AttentionMatrix a =
                attention(h, params.sparc, static_cast<Role>(role), o, Side::Question);
            q.sparse[role].push_back(sparse_encode(a, feats, 0));
        }
    }
    q.tfidf = tfidf_vector(tokens.ids, index.stats, params.vocab);
    return q;
}

namespace {

struct Candidate {
    std::uint32_t entry;
    std::uint32_t start, end;
    double dense = 0.0;
    double sparse = 0.0;
    double doc_tfidf = 0.0;
    double combined = 0.0;
};

/// Per-entry word-level scores; sparse arrays are filled on demand.
struct EntryScores {
    Vec ds, de;          // dense start/end word logits
    Vec ss, se;          // sparse start/end word logits
    bool sparse_ready = false;
    double doc_score = 0.0;
};

/// CSR row against a sorted query sparse vector, accumulated in double.
double postings_dot(const PostingsBlock& block, std::size_t pos, const SparseVector& q) {
    double sum = 0.0;
    std::size_t i = block.offsets[pos], i_end = block.offsets[pos + 1], j = 0;
    while (i < i_end && j < q.ids.size()) {
        if (block.ids[i] < q.ids[j])
            ++i;
        else if (block.ids[i] > q.ids[j])
            ++j;
        else {
            sum += static_cast<double>(block.weights[i]) * static_cast<double>(q.weights[j]);
            ++i;
            ++j;
        }
    }
    return sum;
}

class Scorer {
public:
    Scorer(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg)
        : q_(q), index_(index), cfg_(cfg), scores_(index.entries.size()) {
        if (q.model_hash != index.meta.model_hash) throw DataError("index/model mismatch");
        if (cfg.k < 1) throw UsageError("k must be >= 1");
        if (cfg.top_docs < cfg.k || cfg.top_phrases < cfg.k)
            throw UsageError("candidate budgets must be >= k");
    }

    EntryScores& dense_scores(std::uint32_t ei) {
        auto& s = scores_[ei];
        if (s.ds.size() == 0 && index_.entries[ei].n_tokens() > 0) {
            const auto& e = index_.entries[ei];
            s.ds = e.dense_start.cast<double>() * q_.q_start;
            s.de = e.dense_end.cast<double>() * q_.q_end;
            s.doc_score = tfidf_cosine(e.tfidf, q_.tfidf);
        }
        return s;
    }

    EntryScores& full_scores(std::uint32_t ei) {
        auto& s = dense_scores(ei);
        if (!s.sparse_ready) {
            const auto& e = index_.entries[ei];
            const auto n = static_cast<Eigen::Index>(e.n_tokens());
            s.ss = Vec::Zero(n);
            s.se = Vec::Zero(n);
            for (int role = 0; role < 2; ++role) {
                Vec& target = role == 0 ? s.ss : s.se;
                for (std::size_t o = 0; o < e.postings[role].size(); ++o)
                    for (Eigen::Index pos = 0; pos < n; ++pos)
                        target(pos) +=
                            postings_dot(e.postings[role][o], pos, q_.sparse[role][o]);
            }
            s.sparse_ready = true;
        }
        return s;
    }

    std::vector<SpanCandidate> spans(std::uint32_t ei) const {
        const auto& e = index_.entries[ei];
        std::vector<bool> mask(e.special.begin(), e.special.end());
        return enumerate_spans(e.n_tokens(), index_.meta.max_span_len, mask);
    }

    Candidate rescore(std::uint32_t ei, std::uint32_t start, std::uint32_t end) {
        const auto& s = full_scores(ei);
        Candidate c;
        c.entry = ei;
        c.start = start;
        c.end = end;
        c.dense = s.ds(start) + s.de(end);
        c.sparse = s.ss(start) + s.se(end);
        c.doc_tfidf = s.doc_score;
        c.combined = c.dense + cfg_.lambda_sparse * c.sparse + cfg_.lambda_doc * c.doc_tfidf;
        return c;
    }

    /// Deterministic order: combined descending, then source doc id and the
    /// span's char offsets ascending.
    bool better(const Candidate& a, const Candidate& b) const {
        if (a.combined != b.combined) return a.combined > b.combined;
        const auto key = [this](const Candidate& c) {
            const auto& e = index_.entries[c.entry];
            return std::make_tuple(e.doc_id, e.char_base + e.tok_begin[c.start],
                                   e.char_base + e.tok_end[c.end], c.entry);
        };
        return key(a) < key(b);
    }

    QueryResult finalize(std::vector<Candidate> candidates) {
        std::sort(candidates.begin(), candidates.end(),
                  [this](const Candidate& a, const Candidate& b) { return better(a, b); });
        QueryResult result;
        std::vector<std::tuple<std::string, std::uint64_t, std::uint64_t>> seen;
        for (const auto& c : candidates) {
            if (static_cast<int>(result.hits.size()) >= cfg_.k) break;
            const auto& e = index_.entries[c.entry];
            std::tuple<std::string, std::uint64_t, std::uint64_t> key{
                e.doc_id, e.char_base + e.tok_begin[c.start], e.char_base + e.tok_end[c.end]};
            // Overlapping windows can carry the same source span; keep the
            // best-scored copy only.
            if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
            seen.push_back(key);
            QueryHit hit;
            hit.answer = e.text.substr(e.tok_begin[c.start],
                                       e.tok_end[c.end] - e.tok_begin[c.start]);
            hit.doc_id = e.doc_id;
            hit.title = e.title;
            hit.char_begin = std::get<1>(key);
            hit.char_end = std::get<2>(key);
            hit.dense = c.dense;
            hit.sparse = c.sparse;
            hit.doc_tfidf = c.doc_tfidf;
            hit.combined = c.combined;
            result.hits.push_back(std::move(hit));
        }
        return result;
    }

    /// DFS stage 1: spans ranked by dense logit alone.
    std::vector<Candidate> dense_candidates() {
        const std::size_t n = index_.entries.size();
        std::vector<std::vector<Candidate>> per_entry(n);
        parallel_for(n, cfg_.threads, [&](std::size_t ei) {
            auto& s = dense_scores(static_cast<std::uint32_t>(ei));
            if (s.ds.size() == 0) return;
            for (const auto& sp : spans(static_cast<std::uint32_t>(ei))) {
                Candidate c;
                c.entry = static_cast<std::uint32_t>(ei);
                c.start = sp.start;
                c.end = sp.end;
                c.dense = s.ds(sp.start) + s.de(sp.end);
                per_entry[ei].push_back(c);
            }
        });
        std::vector<Candidate> all;
        for (auto& v : per_entry) all.insert(all.end(), v.begin(), v.end());
        const auto budget = std::min<std::size_t>(all.size(), cfg_.top_phrases);
        std::partial_sort(all.begin(), all.begin() + budget, all.end(),
                          [this](const Candidate& a, const Candidate& b) {
                              if (a.dense != b.dense) return a.dense > b.dense;
                              return std::make_tuple(a.entry, a.start, a.end) <
                                     std::make_tuple(b.entry, b.start, b.end);
                          });
        all.resize(budget);
        return all;
    }

    /// SFS stage 1: every span of the entries ranked best by doc tf-idf.
    std::vector<Candidate> tfidf_candidates() {
        std::vector<std::uint32_t> order(index_.entries.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
        std::vector<double> cosines(order.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            cosines[i] = tfidf_cosine(index_.entries[i].tfidf, q_.tfidf);
        // Ties (e.g. zero overlap everywhere) fall back to id order.
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return cosines[a] > cosines[b];
        });
        const auto budget = std::min<std::size_t>(order.size(), cfg_.top_docs);
        std::vector<Candidate> out;
        for (std::size_t rank = 0; rank < budget; ++rank) {
            const std::uint32_t ei = order[rank];
            if (index_.entries[ei].n_tokens() == 0) continue;
            for (const auto& sp : spans(ei)) {
                Candidate c;
                c.entry = ei;
                c.start = sp.start;
                c.end = sp.end;
                out.push_back(c);
            }
        }
        return out;
    }

    QueryResult run_rescored(std::vector<Candidate> candidates) {
        for (auto& c : candidates) {
            const Candidate full = rescore(c.entry, c.start, c.end);
            c = full;
        }
        return finalize(std::move(candidates));
    }

private:
    const QueryArtifacts& q_;
    const PhraseIndex& index_;
    const SearchConfig& cfg_;
    std::vector<EntryScores> scores_;
};

}  // namespace

QueryResult dfs(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg) {
    Scorer scorer(q, index, cfg);
    return scorer.run_rescored(scorer.dense_candidates());
}

QueryResult sfs(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg) {
    Scorer scorer(q, index, cfg);
    return scorer.run_rescored(scorer.tfidf_candidates());
}

QueryResult hybrid(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg) {
    Scorer scorer(q, index, cfg);
    std::vector<Candidate> pool = scorer.dense_candidates();
    std::vector<Candidate> from_sfs = scorer.tfidf_candidates();
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> keys;
    keys.reserve(pool.size());
    for (const auto& c : pool) keys.emplace_back(c.entry, c.start, c.end);
    std::sort(keys.begin(), keys.end());
    for (const auto& c : from_sfs)
        if (!std::binary_search(keys.begin(), keys.end(),
                                std::make_tuple(c.entry, c.start, c.end)))
            pool.push_back(c);
    return scorer.run_rescored(std::move(pool));
}

QueryResult exhaustive_oracle(const QueryArtifacts& q, const PhraseIndex& index,
                              const SearchConfig& cfg) {
    Scorer scorer(q, index, cfg);
    std::vector<Candidate> all;
    for (std::uint32_t ei = 0; ei < index.entries.size(); ++ei) {
        if (index.entries[ei].n_tokens() == 0) continue;
        for (const auto& sp : scorer.spans(ei)) all.push_back(scorer.rescore(ei, sp.start, sp.end));
    }
    return scorer.finalize(std::move(all));
}

QueryResult search(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg) {
    switch (cfg.strategy) {
        case Strategy::SFS: return sfs(q, index, cfg);
        case Strategy::DFS: return dfs(q, index, cfg);
        case Strategy::Hybrid: return hybrid(q, index, cfg);
        case Strategy::Exhaustive: return exhaustive_oracle(q, index, cfg);
    }
    throw UsageError("unknown strategy");
}

}  // namespace sparc
