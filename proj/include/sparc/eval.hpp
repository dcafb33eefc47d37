#pragma once

#include <string>
#include <vector>

#include "sparc/dataset.hpp"
#include "sparc/search.hpp"

namespace sparc {

/// SQuAD-style normalization: lowercase, strip punctuation, drop articles,
/// collapse whitespace. Idempotent.
std::string normalize_answer(std::string_view text);

/// True iff the normalized prediction equals any normalized gold.
bool exact_match(std::string_view prediction, const std::vector<std::string>& golds);

/// Token-bag F1 in percent, maximized over golds.
double f1_score(std::string_view prediction, const std::vector<std::string>& golds);

struct PerQuestionRecord {
    std::string question;
    std::string prediction;
    std::vector<std::string> golds;
    bool em = false;
    double f1 = 0.0;
    double seconds = 0.0;
    double dense = 0.0, sparse = 0.0, doc_tfidf = 0.0, combined = 0.0;
};

struct EvalReport {
    double em_percent = 0.0;
    double f1_percent = 0.0;
    std::size_t n = 0;
    std::string strategy;
    std::string ablation;  // full | no-sparc | no-doc-tfidf | trigram
    double latency_mean = 0.0, latency_median = 0.0, latency_p95 = 0.0;
    std::vector<PerQuestionRecord> records;
};

/// Scores the top-1 prediction of every question. Throws on an empty dataset.
EvalReport evaluate(const std::vector<QaRecord>& dataset, const PhraseIndex& index,
                    const ModelParams& params, const SearchConfig& cfg,
                    const std::string& ablation_tag);

std::string eval_report_json(const EvalReport& report, bool include_records);

double mean_of(const std::vector<double>& xs);
double median_of(std::vector<double> xs);
double percentile_of(std::vector<double> xs, double p);

}  // namespace sparc
