#include "sparc/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "sparc/errors.hpp"

namespace sparc {

namespace {

bool is_word_byte(unsigned char c) {
    // Non-ASCII bytes count as word characters so UTF-8 sequences stay intact.
    return std::isalnum(c) != 0 || c >= 0x80;
}

void add_token(Vocabulary& v, const std::string& token) {
    v.token_to_id.emplace(token, static_cast<TokenId>(v.id_to_token.size()));
    v.id_to_token.push_back(token);
}

}  // namespace

Vocabulary build_vocab(const std::vector<std::string>& corpus_tokens, std::size_t max_size) {
    if (corpus_tokens.empty()) throw DataError("empty corpus");
    if (max_size < 4) throw UsageError("vocab max_size must be at least 4");

    std::map<std::string, std::uint64_t> counts;  // ordered: lexicographic tie-break for free
    for (const auto& t : corpus_tokens) ++counts[t];
    counts.erase(kClsToken);
    counts.erase(kUnkToken);
    counts.erase(kPadToken);

    std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary v;
    add_token(v, kClsToken);
    add_token(v, kUnkToken);
    add_token(v, kPadToken);
    for (const auto& [token, count] : ranked) {
        if (v.size() >= max_size) break;
        add_token(v, token);
    }
    return v;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t id = 0; id < vocab.id_to_token.size(); ++id)
        out << vocab.id_to_token[id] << '\t' << id << '\n';
}

Vocabulary load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    Vocabulary v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("bad vocab line: " + line);
        const std::string token = line.substr(0, tab);
        const auto id = static_cast<TokenId>(std::stoul(line.substr(tab + 1)));
        if (id != v.id_to_token.size()) throw DataError("vocab ids out of order at: " + line);
        add_token(v, token);
    }
    if (v.size() < 3 || v.id_to_token[0] != kClsToken || v.id_to_token[1] != kUnkToken ||
        v.id_to_token[2] != kPadToken)
        throw DataError("vocab file missing special tokens: " + path);
    return v;
}

std::vector<RawToken> split_text(std::string_view text) {
    std::vector<RawToken> out;
    std::string current;
    std::uint32_t begin = 0;

    auto flush = [&](std::uint32_t end) {
        if (!current.empty()) {
            out.push_back({current, begin, end});
            current.clear();
        }
    };

    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            flush(static_cast<std::uint32_t>(i));
            continue;
        }
        const bool word = is_word_byte(c);
        bool keep_inside = word;
        if (!word) {
            // Interior punctuation survives only between word bytes.
            const bool prev_word = !current.empty();
            const bool next_word =
                i + 1 < n && is_word_byte(static_cast<unsigned char>(text[i + 1]));
            keep_inside = prev_word && next_word;
        }
        if (keep_inside) {
            if (current.empty()) begin = static_cast<std::uint32_t>(i);
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush(static_cast<std::uint32_t>(i));
            out.push_back({std::string(1, static_cast<char>(std::tolower(c))),
                           static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1)});
        }
    }
    flush(static_cast<std::uint32_t>(n));
    return out;
}

TokenSeq tokenize(std::string_view text, const Vocabulary& vocab, bool is_question) {
    TokenSeq seq;
    seq.is_question = is_question;
    if (is_question) {
        seq.ids.push_back(vocab.cls_id);
        seq.char_begin.push_back(0);
        seq.char_end.push_back(0);
    }
    for (const auto& t : split_text(text)) {
        seq.ids.push_back(vocab.lookup(t.text));
        seq.char_begin.push_back(t.char_begin);
        seq.char_end.push_back(t.char_end);
    }
    return seq;
}

}  // namespace sparc
