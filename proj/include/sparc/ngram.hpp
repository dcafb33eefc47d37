#pragma once

#include <cstdint>
#include <vector>

#include "sparc/vocab.hpp"

namespace sparc {

/// Positional base-V layout of global n-gram ids. Unigram ids are the token
/// ids themselves; higher orders stack after the lower-order blocks:
///   order 1: u                      in [0, V)
///   order 2: V + u*V + v            in [V, V + V^2)
///   order 3: V + V^2 + u*V^2 + v*V + w
/// 64-bit ids cover order 3 for V up to 2e6.
std::uint64_t ngram_id(std::uint64_t vocab_size, const TokenId* tokens, int order);

/// Total feature-space size for the given maximum order.
std::uint64_t ngram_feature_dim(std::uint64_t vocab_size, int max_order);

/// Per-position one-hot n-gram features, stored as one global id per row.
/// A row is absent when the window runs off the sequence end or touches a
/// special token ([CLS]/[UNK]/[PAD] carry no lexical content).
struct NgramFeatureMatrix {
    int order = 1;
    std::uint64_t vocab_size = 0;
    static constexpr std::int64_t kAbsent = -1;
    std::vector<std::int64_t> feature_ids;  // size N; kAbsent or a global id

    std::size_t rows() const { return feature_ids.size(); }
    bool present(std::size_t i) const { return feature_ids[i] >= 0; }
    std::uint64_t id_at(std::size_t i) const { return static_cast<std::uint64_t>(feature_ids[i]); }
};

/// Throws UsageError("unsupported n-gram order") for orders outside {1,2,3}.
NgramFeatureMatrix ngram_features(const TokenSeq& tokens, const Vocabulary& vocab, int order);

/// Binary N x M match matrix F F'^T kept as a coordinate list: (i, j) present
/// iff the order-n n-gram at document position i equals the one at question
/// position j.
struct MatchMatrix {
    int order = 1;
    std::uint32_t rows = 0;  // document length N
    std::uint32_t cols = 0;  // question length M
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ones;  // sorted (i, j)
};

/// The kernel function: computed by grouping question positions per feature
/// id, never via the F-dimensional space itself.
/// Throws UsageError("kernel order mismatch") when orders differ.
MatchMatrix match_kernel(const NgramFeatureMatrix& doc, const NgramFeatureMatrix& question);

}  // namespace sparc
