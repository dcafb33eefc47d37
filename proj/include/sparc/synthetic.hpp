#pragma once

#include <cstdint>
#include <vector>

#include "sparc/corpus.hpp"
#include "sparc/dataset.hpp"

namespace sparc {

/// Disambiguation benchmark: every document pairs years with population
/// figures so that a confusable wrong figure sits closer (in tokens) to the
/// queried year than the right one for half of the questions.
struct SyntheticSpec {
    int num_docs = 50;
    int entities_per_doc = 4;        // (year, figure) facts per document
    double distractor_density = 0.5; // filler facts per entity
    std::uint64_t seed = 0;
};

struct SyntheticData {
    std::vector<CorpusDoc> corpus;
    std::vector<QaRecord> train;  // one phrasing
    std::vector<QaRecord> dev;    // a held-out phrasing over the same facts
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace sparc
