#include "sparc/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "sparc/errors.hpp"

namespace sparc {

std::vector<QaRecord> load_squad_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    std::vector<QaRecord> out;
    for (const auto& article : j.at("data")) {
        const std::string title = article.value("title", "");
        for (const auto& para : article.at("paragraphs")) {
            const std::string context = para.at("context").get<std::string>();
            for (const auto& qa : para.at("qas")) {
                QaRecord r;
                r.question = qa.at("question").get<std::string>();
                r.context = context;
                r.doc_id = title;
                for (const auto& ans : qa.at("answers"))
                    r.golds.push_back(ans.at("text").get<std::string>());
                if (r.golds.empty()) continue;
                r.answer_text = qa.at("answers")[0].at("text").get<std::string>();
                r.answer_start_char = qa.at("answers")[0].at("answer_start").get<std::uint32_t>();
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

std::vector<QaRecord> load_qa_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<QaRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        QaRecord r;
        r.question = j.at("question").get<std::string>();
        r.context = j.value("context", "");
        r.answer_text = j.value("answer_text", "");
        r.answer_start_char = j.value("answer_start_char", 0u);
        r.doc_id = j.value("doc_id", "");
        if (j.contains("golds"))
            r.golds = j.at("golds").get<std::vector<std::string>>();
        else if (!r.answer_text.empty())
            r.golds.push_back(r.answer_text);
        out.push_back(std::move(r));
    }
    return out;
}

void save_qa_jsonl(const std::vector<QaRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& r : records) {
        nlohmann::json j{{"question", r.question},
                         {"context", r.context},
                         {"answer_text", r.answer_text},
                         {"answer_start_char", r.answer_start_char},
                         {"doc_id", r.doc_id}};
        if (r.golds.size() > 1) j["golds"] = r.golds;
        out << j.dump() << '\n';
    }
}

std::optional<TrainingExample> make_training_example(const QaRecord& record,
                                                     const Vocabulary& vocab) {
    TrainingExample ex;
    ex.paragraph = tokenize(record.context, vocab, false);
    ex.question = tokenize(record.question, vocab, true);
    if (ex.paragraph.size() == 0) return std::nullopt;

    const std::uint32_t ans_begin = record.answer_start_char;
    const auto ans_end = static_cast<std::uint32_t>(ans_begin + record.answer_text.size());

    std::int64_t start = -1, end = -1;
    for (std::size_t i = 0; i < ex.paragraph.size(); ++i) {
        if (ex.paragraph.char_begin[i] == ans_begin) start = static_cast<std::int64_t>(i);
        if (ex.paragraph.char_end[i] == ans_end) end = static_cast<std::int64_t>(i);
    }
    if (start < 0 || end < 0 || end < start) return std::nullopt;
    if (vocab.is_special(ex.paragraph.ids[start]) || vocab.is_special(ex.paragraph.ids[end]))
        return std::nullopt;
    ex.gold_start = static_cast<std::uint32_t>(start);
    ex.gold_end = static_cast<std::uint32_t>(end);
    return ex;
}

}  // namespace sparc
