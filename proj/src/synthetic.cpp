#include "sparc/synthetic.hpp"

#include <cmath>

#include "sparc/errors.hpp"
#include "sparc/rng.hpp"

namespace sparc {

namespace {

const char* kTownStems[] = {"bar", "cor", "dan", "fel", "gar", "hol", "kin", "lor", "mar",
                            "nor", "pel", "quin", "ros", "sel", "tor", "vel", "win", "yar"};
const char* kTownSuffixes[] = {"ton", "ford", "dale", "burg", "mont", "wick", "field", "haven"};
const char* kRegions[] = {"green", "upper", "lower", "old", "silver", "stone"};

/// Appends text pieces while recording where marked pieces landed.
struct TextBuilder {
    std::string text;

    void add(const std::string& piece) { text += piece; }
    std::uint32_t add_marked(const std::string& piece) {
        const auto offset = static_cast<std::uint32_t>(text.size());
        text += piece;
        return offset;
    }
};

std::vector<std::string> town_pool(std::size_t count, Rng& rng) {
    std::vector<std::string> combos;
    for (const char* stem : kTownStems)
        for (const char* suffix : kTownSuffixes) combos.push_back(std::string(stem) + suffix);
    rng.shuffle(combos);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i < combos.size())
            out.push_back(combos[i]);
        else
            out.push_back(combos[i % combos.size()] + "-" + std::to_string(i / combos.size() + 1));
    }
    return out;
}

std::vector<std::string> year_pool(Rng& rng) {
    std::vector<std::string> years;
    for (int y = 1200; y < 2100; ++y) years.push_back(std::to_string(y));
    rng.shuffle(years);
    return years;
}

std::vector<std::string> figure_pool(Rng& rng) {
    std::vector<std::string> figures;
    for (int thousands = 100; thousands < 1000; ++thousands)
        for (int hundreds = 0; hundreds < 10; ++hundreds)
            figures.push_back(std::to_string(thousands) + "," + std::to_string(hundreds) + "00");
    rng.shuffle(figures);
    return figures;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.num_docs < 1 || spec.entities_per_doc < 1)
        throw UsageError("synthetic spec needs at least one document and one entity");

    Rng rng(spec.seed);
    const auto towns = town_pool(spec.num_docs, rng);
    auto years = year_pool(rng);
    auto figures = figure_pool(rng);

    const int fillers_per_doc =
        static_cast<int>(std::llround(spec.distractor_density * spec.entities_per_doc / 2.0));
    const std::size_t demand =
        static_cast<std::size_t>(spec.num_docs) * (spec.entities_per_doc + fillers_per_doc);
    if (demand > years.size() || demand > figures.size())
        throw UsageError("synthetic spec exceeds the unique year/figure pools");

    std::size_t next_value = 0;  // cursor into the shuffled pools
    SyntheticData data;
    for (int di = 0; di < spec.num_docs; ++di) {
        const std::string& town = towns[di];
        TextBuilder b;
        b.add("The town of " + town + " lies in the " +
              kRegions[rng.below(std::size(kRegions))] + " valley.");

        struct Fact {
            std::string year, figure;
            std::uint32_t offset;
        };
        std::vector<Fact> facts;

        int remaining = spec.entities_per_doc;
        while (remaining >= 2) {
            // The figure for year_a sits between year_b and its own figure, so
            // questions about year_b have a closer confusable answer.
            Fact fa{years[next_value], figures[next_value], 0};
            ++next_value;
            Fact fb{years[next_value], figures[next_value], 0};
            ++next_value;
            b.add(" By " + fb.year + " the population of " + town + ", which stood at ");
            fa.offset = b.add_marked(fa.figure);
            b.add(" in " + fa.year + ", had reached ");
            fb.offset = b.add_marked(fb.figure);
            b.add(".");
            facts.push_back(fa);
            facts.push_back(fb);
            remaining -= 2;
        }
        if (remaining == 1) {
            Fact f{years[next_value], figures[next_value], 0};
            ++next_value;
            b.add(" In " + f.year + " the town of " + town + " recorded a population of ");
            f.offset = b.add_marked(f.figure);
            b.add(".");
            facts.push_back(f);
        }
        for (int fi = 0; fi < fillers_per_doc; ++fi) {
            b.add(" The nearby area counted " + figures[next_value] + " visitors in " +
                  years[next_value] + ".");
            ++next_value;
        }

        char id[16];
        std::snprintf(id, sizeof(id), "doc-%04d", di);
        CorpusDoc doc{id, town, b.text};
        data.corpus.push_back(doc);

        for (const auto& f : facts) {
            QaRecord train;
            train.question = "What was the population of " + town + " in " + f.year + "?";
            train.context = b.text;
            train.answer_text = f.figure;
            train.answer_start_char = f.offset;
            train.golds = {f.figure};
            train.doc_id = id;
            data.train.push_back(train);

            QaRecord dev = train;
            dev.question = "How many people lived in " + town + " in " + f.year + "?";
            data.dev.push_back(dev);
        }
    }
    return data;
}

}  // namespace sparc
