#include "sparc/ngram.hpp"

#include <unordered_map>

#include "sparc/errors.hpp"

namespace sparc {

std::uint64_t ngram_id(std::uint64_t v, const TokenId* t, int order) {
    switch (order) {
        case 1:
            return t[0];
        case 2:
            return v + t[0] * v + t[1];
        case 3:
            return v + v * v + t[0] * v * v + t[1] * v + t[2];
        default:
            throw UsageError("unsupported n-gram order");
    }
}

std::uint64_t ngram_feature_dim(std::uint64_t v, int max_order) {
    switch (max_order) {
        case 1:
            return v;
        case 2:
            return v + v * v;
        case 3:
            return v + v * v + v * v * v;
        default:
            throw UsageError("unsupported n-gram order");
    }
}

NgramFeatureMatrix ngram_features(const TokenSeq& tokens, const Vocabulary& vocab, int order) {
    if (order < 1 || order > 3) throw UsageError("unsupported n-gram order");
    const std::size_t n = tokens.size();
    NgramFeatureMatrix m;
    m.order = order;
    m.vocab_size = vocab.size();
    m.feature_ids.assign(n, NgramFeatureMatrix::kAbsent);
    for (std::size_t i = 0; i + order <= n; ++i) {
        bool ok = true;
        for (int k = 0; k < order; ++k)
            if (vocab.is_special(tokens.ids[i + k])) ok = false;
        if (!ok) continue;
        m.feature_ids[i] =
            static_cast<std::int64_t>(ngram_id(m.vocab_size, tokens.ids.data() + i, order));
    }
    return m;
}

MatchMatrix match_kernel(const NgramFeatureMatrix& doc, const NgramFeatureMatrix& question) {
    if (doc.order != question.order) throw UsageError("kernel order mismatch");
    MatchMatrix k;
    k.order = doc.order;
    k.rows = static_cast<std::uint32_t>(doc.rows());
    k.cols = static_cast<std::uint32_t>(question.rows());

    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_feature;
    for (std::size_t j = 0; j < question.rows(); ++j)
        if (question.present(j))
            by_feature[question.id_at(j)].push_back(static_cast<std::uint32_t>(j));

    for (std::size_t i = 0; i < doc.rows(); ++i) {
        if (!doc.present(i)) continue;
        auto it = by_feature.find(doc.id_at(i));
        if (it == by_feature.end()) continue;
        for (std::uint32_t j : it->second) k.ones.emplace_back(static_cast<std::uint32_t>(i), j);
    }
    return k;
}

}  // namespace sparc
