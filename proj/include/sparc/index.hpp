#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sparc/corpus.hpp"
#include "sparc/model.hpp"
#include "sparc/sparse_rep.hpp"
#include "sparc/tfidf.hpp"

namespace sparc {

/// CSR postings for one (role, order) over the positions of one entry.
struct PostingsBlock {
    std::vector<std::uint64_t> offsets;  // N + 1
    std::vector<std::uint64_t> ids;     // sorted within each position
    std::vector<float> weights;         // >= 0
};

/// One indexed window of a corpus document.
struct IndexEntry {
    std::string doc_id;
    std::string title;
    std::uint64_t char_base = 0;  // window's byte offset in the source text
    std::string text;             // window text slice
    std::vector<std::uint32_t> tok_begin, tok_end;  // offsets within `text`
    std::vector<std::uint8_t> special;              // special-token mask
    MatF dense_start, dense_end;                    // N x d_p
    std::array<std::vector<PostingsBlock>, 2> postings;  // [role][order idx]
    TfidfVector tfidf;

    std::size_t n_tokens() const { return tok_begin.size(); }
};

struct IndexMeta {
    std::uint64_t model_hash = 0;
    int d = 0;
    int d_p = 0;
    int max_span_len = 0;
    std::vector<int> orders;
    std::uint32_t prune_k = 100;
    std::string tfidf_unit = "record";  // or "window"
};

struct PhraseIndex {
    IndexMeta meta;
    Vocabulary vocab;
    TfidfStats stats;  // idf source for query-side vectors
    std::vector<IndexEntry> entries;
};

struct IndexBuildConfig {
    std::uint32_t prune_k = 100;        // top weights kept per position/order; 0 = keep all
    std::string tfidf_unit = "record";  // idf/tf granularity: source record or window
    int threads = 1;
};

/// Encodes every document (windowed at max_seq_len with half-window stride),
/// projects dense start/end vectors, and materializes pruned sparse postings.
/// Output is ordered by document id position regardless of thread count.
PhraseIndex build_index(const std::vector<CorpusDoc>& corpus, const ModelParams& params,
                        const IndexBuildConfig& cfg);

/// Document tf-idf vectors alone (the -doc-tfidf ablation target).
std::vector<TfidfVector> doc_tfidf(const std::vector<CorpusDoc>& corpus,
                                   const Vocabulary& vocab);

void save_index(const PhraseIndex& index, const std::string& path);
PhraseIndex load_index(const std::string& path);

/// Field-by-field equality with bit-exact array comparison.
bool index_equal(const PhraseIndex& a, const PhraseIndex& b);

}  // namespace sparc
