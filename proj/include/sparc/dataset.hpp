#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparc/vocab.hpp"

namespace sparc {

/// One extractive QA record. `golds` holds every reference answer; the
/// first one carries the char offset used for training.
struct QaRecord {
    std::string question;
    std::string context;
    std::string answer_text;
    std::uint32_t answer_start_char = 0;
    std::vector<std::string> golds;
    std::string doc_id;
};

/// SQuAD v1.1 layout: data -> paragraphs -> qas -> answers.
std::vector<QaRecord> load_squad_json(const std::string& path);

/// JSONL records {"question","context","answer_start_char","answer_text"}.
std::vector<QaRecord> load_qa_jsonl(const std::string& path);
void save_qa_jsonl(const std::vector<QaRecord>& records, const std::string& path);

/// A tokenized record ready for the loss: the paragraph may later carry an
/// appended negative, marked by negative_begin.
struct TrainingExample {
    TokenSeq paragraph;
    TokenSeq question;
    std::uint32_t gold_start = 0;
    std::uint32_t gold_end = 0;
    std::int64_t negative_begin = -1;  // token index where the negative region starts; -1 = none
    std::vector<double> extra_start_logits;  // word-level additive terms; empty = zeros
    std::vector<double> extra_end_logits;
};

/// Maps the answer char range onto token boundaries. Returns nullopt when
/// the answer does not align with the tokenization.
std::optional<TrainingExample> make_training_example(const QaRecord& record,
                                                     const Vocabulary& vocab);

}  // namespace sparc
