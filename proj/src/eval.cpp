#include "sparc/eval.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sparc/errors.hpp"

namespace sparc {

std::string normalize_answer(std::string_view text) {
    std::string lowered;
    lowered.reserve(text.size());
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::ispunct(c)) continue;
        lowered.push_back(static_cast<char>(std::tolower(c)));
    }
    std::istringstream words(lowered);
    std::string word, out;
    while (words >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

bool exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
    if (golds.empty()) throw UsageError("exact_match requires at least one gold");
    const std::string p = normalize_answer(prediction);
    for (const auto& g : golds)
        if (p == normalize_answer(g)) return true;
    return false;
}

namespace {

std::map<std::string, int> token_bag(const std::string& normalized) {
    std::map<std::string, int> bag;
    std::istringstream words(normalized);
    std::string word;
    while (words >> word) ++bag[word];
    return bag;
}

}  // namespace

double f1_score(std::string_view prediction, const std::vector<std::string>& golds) {
    if (golds.empty()) throw UsageError("f1 requires at least one gold");
    const auto pred_bag = token_bag(normalize_answer(prediction));
    double best = 0.0;
    for (const auto& g : golds) {
        const auto gold_bag = token_bag(normalize_answer(g));
        int common = 0;
        int pred_total = 0, gold_total = 0;
        for (const auto& [w, c] : pred_bag) pred_total += c;
        for (const auto& [w, c] : gold_bag) gold_total += c;
        for (const auto& [w, c] : pred_bag) {
            auto it = gold_bag.find(w);
            if (it != gold_bag.end()) common += std::min(c, it->second);
        }
        double f1 = 0.0;
        if (pred_total == 0 && gold_total == 0)
            f1 = 100.0;  // both empty after normalization
        else if (common > 0) {
            const double p = static_cast<double>(common) / pred_total;
            const double r = static_cast<double>(common) / gold_total;
            f1 = 100.0 * 2.0 * p * r / (p + r);
        }
        best = std::max(best, f1);
    }
    return best;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double percentile_of(std::vector<double> xs, double p) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(p / 100.0 * static_cast<double>(xs.size())));
    return xs[std::min(xs.size() - 1, rank > 0 ? rank - 1 : 0)];
}

EvalReport evaluate(const std::vector<QaRecord>& dataset, const PhraseIndex& index,
                    const ModelParams& params, const SearchConfig& cfg,
                    const std::string& ablation_tag) {
    if (dataset.empty()) throw DataError("empty evaluation dataset");

    EvalReport report;
    report.strategy = strategy_name(cfg.strategy);
    report.ablation = ablation_tag;
    report.n = dataset.size();

    double em_sum = 0.0, f1_sum = 0.0;
    std::vector<double> seconds;
    seconds.reserve(dataset.size());
    for (const auto& record : dataset) {
        if (record.golds.empty()) throw DataError("question without gold answers");
        PerQuestionRecord r;
        r.question = record.question;
        r.golds = record.golds;

        const auto t0 = std::chrono::steady_clock::now();
        const QueryArtifacts q = make_query_artifacts(record.question, params, index);
        const QueryResult result = search(q, index, cfg);
        const auto t1 = std::chrono::steady_clock::now();
        r.seconds = std::chrono::duration<double>(t1 - t0).count();
        seconds.push_back(r.seconds);

        if (!result.hits.empty()) {
            const auto& hit = result.hits.front();
            r.prediction = hit.answer;
            r.dense = hit.dense;
            r.sparse = hit.sparse;
            r.doc_tfidf = hit.doc_tfidf;
            r.combined = hit.combined;
        }
        r.em = exact_match(r.prediction, r.golds);
        r.f1 = r.em ? 100.0 : f1_score(r.prediction, r.golds);
        em_sum += r.em ? 100.0 : 0.0;
        f1_sum += r.f1;
        report.records.push_back(std::move(r));
    }

    report.em_percent = em_sum / static_cast<double>(dataset.size());
    report.f1_percent = f1_sum / static_cast<double>(dataset.size());
    report.latency_mean = mean_of(seconds);
    report.latency_median = median_of(seconds);
    report.latency_p95 = percentile_of(seconds, 95.0);
    return report;
}

std::string eval_report_json(const EvalReport& report, bool include_records) {
    nlohmann::json j{{"em", report.em_percent},
                     {"f1", report.f1_percent},
                     {"n", report.n},
                     {"strategy", report.strategy},
                     {"ablation", report.ablation},
                     {"latency", {{"mean_s", report.latency_mean},
                                  {"median_s", report.latency_median},
                                  {"p95_s", report.latency_p95}}}};
    if (include_records) {
        auto& records = j["records"] = nlohmann::json::array();
        for (const auto& r : report.records) {
            records.push_back({{"question", r.question},
                               {"prediction", r.prediction},
                               {"golds", r.golds},
                               {"em", r.em},
                               {"f1", r.f1},
                               {"seconds", r.seconds},
                               {"scores",
                                {{"dense", r.dense},
                                 {"sparse", r.sparse},
                                 {"doc_tfidf", r.doc_tfidf},
                                 {"combined", r.combined}}}});
        }
    }
    return j.dump(2);
}

}  // namespace sparc
