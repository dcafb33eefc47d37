#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sparc/vocab.hpp"

namespace sparc {

/// Sparse tf-idf vector: ids sorted ascending, weights >= 0, L2-normalized
/// (or all-zero when every term has zero idf).
struct TfidfVector {
    std::vector<TokenId> ids;
    std::vector<float> weights;

    std::size_t nnz() const { return ids.size(); }
};

/// Corpus-level document frequencies; idf(t) = ln(D / df(t)).
struct TfidfStats {
    std::uint64_t num_docs = 0;
    std::unordered_map<TokenId, std::uint32_t> df;

    double idf(TokenId t) const {
        auto it = df.find(t);
        if (it == df.end() || it->second == 0) return 0.0;
        return std::log(static_cast<double>(num_docs) / it->second);
    }
};

/// Document frequency over token-id documents; specials are skipped.
TfidfStats compute_tfidf_stats(const std::vector<std::vector<TokenId>>& docs,
                               const Vocabulary& vocab);

/// tf = 1 + ln(count), weight = tf * idf, then L2 normalization.
TfidfVector tfidf_vector(const std::vector<TokenId>& tokens, const TfidfStats& stats,
                         const Vocabulary& vocab);

double tfidf_cosine(const TfidfVector& a, const TfidfVector& b);

}  // namespace sparc
