#include "sparc/tfidf.hpp"

#include <cmath>
#include <map>

namespace sparc {

TfidfStats compute_tfidf_stats(const std::vector<std::vector<TokenId>>& docs,
                               const Vocabulary& vocab) {
    TfidfStats stats;
    stats.num_docs = docs.size();
    for (const auto& doc : docs) {
        std::unordered_map<TokenId, bool> seen;
        for (TokenId t : doc) {
            if (vocab.is_special(t)) continue;
            if (!seen.emplace(t, true).second) continue;
            ++stats.df[t];
        }
    }
    return stats;
}

TfidfVector tfidf_vector(const std::vector<TokenId>& tokens, const TfidfStats& stats,
                         const Vocabulary& vocab) {
    std::map<TokenId, std::uint64_t> counts;
    for (TokenId t : tokens)
        if (!vocab.is_special(t)) ++counts[t];

    TfidfVector v;
    double norm_sq = 0.0;
    std::vector<double> raw;
    for (const auto& [t, count] : counts) {
        const double idf = stats.idf(t);
        if (idf <= 0.0) continue;
        const double w = (1.0 + std::log(static_cast<double>(count))) * idf;
        v.ids.push_back(t);
        raw.push_back(w);
        norm_sq += w * w;
    }
    const double norm = std::sqrt(norm_sq);
    v.weights.reserve(raw.size());
    for (double w : raw) v.weights.push_back(static_cast<float>(norm > 0.0 ? w / norm : 0.0));
    return v;
}

double tfidf_cosine(const TfidfVector& a, const TfidfVector& b) {
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.ids.size() && j < b.ids.size()) {
        if (a.ids[i] < b.ids[j])
            ++i;
        else if (a.ids[i] > b.ids[j])
            ++j;
        else {
            sum += static_cast<double>(a.weights[i]) * static_cast<double>(b.weights[j]);
            ++i;
            ++j;
        }
    }
    return sum;
}

}  // namespace sparc
