#pragma once

#include <string>
#include <vector>

#include "sparc/search.hpp"

namespace sparc {

struct BenchStats {
    double mean_s = 0.0;
    double median_s = 0.0;
    double p95_s = 0.0;
    std::size_t measurements = 0;
};

/// Wall-clock seconds per query (encoding + search, index load excluded).
/// Runs `warmup` untimed passes first. Throws DataError("no measurements")
/// when repetitions or the query list is empty.
BenchStats benchmark(const std::vector<std::string>& questions, const PhraseIndex& index,
                     const ModelParams& params, const SearchConfig& cfg, int repetitions,
                     int warmup = 1);

}  // namespace sparc
