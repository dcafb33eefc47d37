#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>

#include "sparc/corpus.hpp"
#include "sparc/dataset.hpp"
#include "sparc/errors.hpp"
#include "sparc/vocab.hpp"
#include "test_util.hpp"

using namespace sparc;

TEST_SUITE("vocab") {

TEST_CASE("frequency order with lexicographic ties") {
    const Vocabulary v = build_vocab({"a", "b", "a"}, 10);
    CHECK(v.contains("a"));
    CHECK(v.contains("b"));
    CHECK(v.contains(kClsToken));
    CHECK(v.contains(kUnkToken));
    CHECK(v.contains(kPadToken));
    CHECK(v.token_to_id.at("a") < v.token_to_id.at("b"));
    CHECK(v.token_to_id.at("a") == 3);  // right after the specials
}

TEST_CASE("specials always survive a tight budget") {
    const Vocabulary v = build_vocab({"x"}, 4);
    CHECK(v.size() == 4);
    CHECK(v.contains("x"));
    CHECK(v.is_special(v.cls_id));
    CHECK(v.is_special(v.unk_id));
    CHECK(v.is_special(v.pad_id));
    CHECK(v.cls_id != v.unk_id);
    CHECK(v.unk_id != v.pad_id);
}

TEST_CASE("top-k against an independent frequency oracle") {
    // 1000-token stream over ~120 words, skewed toward low word indices.
    Rng rng(42);
    std::vector<std::string> stream;
    while (stream.size() < 1000)
        stream.push_back("w" + std::to_string(rng.below(rng.below(119) + 1)));

    std::map<std::string, int> counts;
    for (const auto& t : stream) ++counts[t];
    std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    const Vocabulary v = build_vocab(stream, 50);
    REQUIRE(v.size() == 50);
    for (std::size_t i = 0; i < 47; ++i) {
        CAPTURE(ranked[i].first);
        CHECK(v.token_to_id.at(ranked[i].first) == i + 3);
    }
}

TEST_CASE("empty corpus rejected") {
    CHECK_THROWS_WITH_AS(build_vocab({}, 10), "empty corpus", DataError);
}

TEST_CASE("bijection invariant") {
    const Vocabulary v = build_vocab({"cat", "dog", "cat", "fish", "dog", "cat"}, 100);
    for (const auto& [token, id] : v.token_to_id) CHECK(v.id_to_token[id] == token);
    for (std::size_t id = 0; id < v.size(); ++id)
        CHECK(v.token_to_id.at(v.id_to_token[id]) == id);
}

TEST_CASE("tokenizer keeps digit-interior punctuation") {
    const Vocabulary v = testutil::make_vocab({"in", "1991", ",", "415,000"});
    const TokenSeq s = tokenize("In 1991, 415,000", v, false);
    REQUIRE(s.size() == 4);
    CHECK(s.ids[0] == v.token_to_id.at("in"));
    CHECK(s.ids[1] == v.token_to_id.at("1991"));
    CHECK(s.ids[2] == v.token_to_id.at(","));
    CHECK(s.ids[3] == v.token_to_id.at("415,000"));
    CHECK(s.char_begin[0] == 0);
    CHECK(s.char_end[0] == 2);
    CHECK(s.char_begin[1] == 3);
    CHECK(s.char_end[1] == 7);
    CHECK(s.char_begin[2] == 7);
    CHECK(s.char_end[2] == 8);
    CHECK(s.char_begin[3] == 9);
    CHECK(s.char_end[3] == 16);
}

TEST_CASE("questions get [CLS] prepended") {
    const Vocabulary v = testutil::make_vocab({"when", "?"});
    const TokenSeq s = tokenize("when?", v, true);
    REQUIRE(s.size() == 3);
    CHECK(s.ids[0] == v.cls_id);
    CHECK(s.ids[1] == v.token_to_id.at("when"));
    CHECK(s.ids[2] == v.token_to_id.at("?"));
    CHECK(tokenize("", v, true).size() == 1);  // [CLS]-only
    CHECK(tokenize("", v, false).size() == 0);
}

TEST_CASE("OOV maps to [UNK]") {
    const Vocabulary v = testutil::make_vocab({"the", "word"});
    const TokenSeq s = tokenize("the zyzzyva word", v, false);
    REQUIRE(s.size() == 3);
    CHECK(s.ids[1] == v.unk_id);
}

TEST_CASE("vocab file round trip, sorted by id") {
    const Vocabulary v = build_vocab({"beta", "alpha", "beta", "gamma"}, 100);
    const std::string path = "/tmp/sparc_test_vocab.txt";
    save_vocab(v, path);
    const Vocabulary loaded = load_vocab(path);
    CHECK(loaded.id_to_token == v.id_to_token);

    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == std::string(kClsToken) + "\t0");
    std::remove(path.c_str());
}

TEST_CASE("squad json ingestion maps answers onto token spans") {
    const char* squad = R"({"data": [{"title": "town", "paragraphs": [{
        "context": "In 1991, 415,000 people lived here.",
        "qas": [{"id": "q1", "question": "How many people lived here in 1991?",
                 "answers": [{"text": "415,000", "answer_start": 9},
                             {"text": "415,000 people", "answer_start": 9}]}]}]}]})";
    const std::string path = "/tmp/sparc_test_squad.json";
    {
        std::ofstream out(path);
        out << squad;
    }
    const auto records = load_squad_json(path);
    REQUIRE(records.size() == 1);
    CHECK(records[0].question == "How many people lived here in 1991?");
    CHECK(records[0].answer_text == "415,000");
    CHECK(records[0].answer_start_char == 9);
    CHECK(records[0].golds.size() == 2);

    const Vocabulary v =
        testutil::make_vocab({"in", "1991", ",", "415,000", "people", "lived", "here", "."});
    const auto ex = make_training_example(records[0], v);
    REQUIRE(ex.has_value());
    CHECK(ex->gold_start == 3);  // [in, 1991, ",", 415,000, ...]
    CHECK(ex->gold_end == 3);
    CHECK(ex->question.ids[0] == v.cls_id);

    // Misaligned answers are rejected rather than silently shifted.
    auto bad = records[0];
    bad.answer_start_char = 11;
    CHECK_FALSE(make_training_example(bad, v).has_value());
    std::remove(path.c_str());
}

TEST_CASE("corpus jsonl round trip") {
    const std::vector<CorpusDoc> docs{{"d1", "title one", "some text here"},
                                      {"d2", "", "other \"quoted\" text"}};
    const std::string path = "/tmp/sparc_test_corpus.jsonl";
    save_corpus_jsonl(docs, path);
    const auto loaded = load_corpus_jsonl(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "d1");
    CHECK(loaded[0].title == "title one");
    CHECK(loaded[1].text == docs[1].text);
    std::remove(path.c_str());
}

}  // TEST_SUITE
