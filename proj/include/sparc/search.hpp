#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sparc/index.hpp"
#include "sparc/model.hpp"

namespace sparc {

enum class Strategy { SFS, DFS, Hybrid, Exhaustive };

Strategy strategy_from_name(const std::string& name);
std::string strategy_name(Strategy s);

struct SearchConfig {
    Strategy strategy = Strategy::Hybrid;
    int k = 5;
    int top_docs = 10;       // SFS: entries whose spans get fully scored
    int top_phrases = 1000;  // DFS: spans kept from the dense scan
    double lambda_sparse = 1.0;
    double lambda_doc = 1.0;
    int threads = 1;
};

/// Query-side encodings: dense phrase vector halves, per-role/order [CLS]
/// sparse vectors, and the question tf-idf vector under the index's idf.
struct QueryArtifacts {
    Vec q_start, q_end;                               // d_p
    std::array<std::vector<SparseVector>, 2> sparse;  // [role][order idx]
    TfidfVector tfidf;
    std::uint64_t model_hash = 0;
};

QueryArtifacts make_query_artifacts(const std::string& question, const ModelParams& params,
                                    const PhraseIndex& index);

struct QueryHit {
    std::string answer;
    std::string doc_id;
    std::string title;
    std::uint64_t char_begin = 0;  // offsets into the source document text
    std::uint64_t char_end = 0;
    double dense = 0.0;
    double sparse = 0.0;     // raw, before lambda_sparse
    double doc_tfidf = 0.0;  // raw, before lambda_doc
    double combined = 0.0;
};

struct QueryResult {
    std::vector<QueryHit> hits;  // combined-score descending
};

/// Dense-first: exact dense scan, keep top_phrases, rerank with the full
/// combined score. Throws DataError("index/model mismatch") on hash mismatch.
QueryResult dfs(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg);

/// Sparse-first: rank entries by doc tf-idf cosine, fully score the spans of
/// the top_docs entries.
QueryResult sfs(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg);

/// Union of the SFS and DFS candidate sets, deduped, rescored.
QueryResult hybrid(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg);

/// Scores every span of every entry; the reference for equivalence tests.
QueryResult exhaustive_oracle(const QueryArtifacts& q, const PhraseIndex& index,
                              const SearchConfig& cfg);

QueryResult search(const QueryArtifacts& q, const PhraseIndex& index, const SearchConfig& cfg);

}  // namespace sparc
