#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sparc {

using TokenId = std::uint32_t;

inline constexpr const char* kClsToken = "[CLS]";
inline constexpr const char* kUnkToken = "[UNK]";
inline constexpr const char* kPadToken = "[PAD]";

/// Token string <-> id bijection with reserved [CLS]/[UNK]/[PAD] slots.
struct Vocabulary {
    std::unordered_map<std::string, TokenId> token_to_id;
    std::vector<std::string> id_to_token;
    TokenId cls_id = 0;
    TokenId unk_id = 1;
    TokenId pad_id = 2;

    std::size_t size() const { return id_to_token.size(); }
    bool is_special(TokenId id) const { return id == cls_id || id == unk_id || id == pad_id; }
    bool contains(const std::string& token) const { return token_to_id.count(token) != 0; }

    /// Looks a token up, falling back to [UNK].
    TokenId lookup(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? unk_id : it->second;
    }
};

/// Most-frequent-first vocabulary over a token stream; frequency ties break
/// lexicographically and specials always occupy the first three ids.
/// Throws DataError("empty corpus") on an empty stream.
Vocabulary build_vocab(const std::vector<std::string>& corpus_tokens, std::size_t max_size);

void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

struct RawToken {
    std::string text;          // lowercased
    std::uint32_t char_begin;  // byte offsets into the source string
    std::uint32_t char_end;
};

/// Whitespace/punctuation splitter. Punctuation flanked by alphanumerics on
/// both sides stays inside the token ("415,000", "don't"); everything else
/// becomes a standalone token.
std::vector<RawToken> split_text(std::string_view text);

struct TokenSeq {
    std::vector<TokenId> ids;
    std::vector<std::uint32_t> char_begin;  // per token; [CLS] carries (0, 0)
    std::vector<std::uint32_t> char_end;
    bool is_question = false;

    std::size_t size() const { return ids.size(); }
};

/// Splits, lowercases, maps OOV to [UNK]; questions get [CLS] prepended.
TokenSeq tokenize(std::string_view text, const Vocabulary& vocab, bool is_question);

}  // namespace sparc
