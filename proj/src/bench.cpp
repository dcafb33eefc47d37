#include "sparc/bench.hpp"

#include <chrono>

#include "sparc/errors.hpp"
#include "sparc/eval.hpp"

namespace sparc {

BenchStats benchmark(const std::vector<std::string>& questions, const PhraseIndex& index,
                     const ModelParams& params, const SearchConfig& cfg, int repetitions,
                     int warmup) {
    if (repetitions < 1 || questions.empty()) throw DataError("no measurements");

    for (int w = 0; w < warmup; ++w)
        for (const auto& question : questions) {
            const QueryArtifacts q = make_query_artifacts(question, params, index);
            (void)search(q, index, cfg);
        }

    std::vector<double> seconds;
    seconds.reserve(static_cast<std::size_t>(repetitions) * questions.size());
    for (int r = 0; r < repetitions; ++r) {
        for (const auto& question : questions) {
            const auto t0 = std::chrono::steady_clock::now();
            const QueryArtifacts q = make_query_artifacts(question, params, index);
            (void)search(q, index, cfg);
            const auto t1 = std::chrono::steady_clock::now();
            seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
    }

    BenchStats stats;
    stats.measurements = seconds.size();
    stats.mean_s = mean_of(seconds);
    stats.median_s = median_of(seconds);
    stats.p95_s = percentile_of(seconds, 95.0);
    return stats;
}

}  // namespace sparc
