#include "sparc/corpus.hpp"

#include <fstream>

#include <json.hpp>

#include "sparc/errors.hpp"

namespace sparc {

std::vector<CorpusDoc> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<CorpusDoc> docs;
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
        CorpusDoc d;
        d.id = j.value("id", "doc-" + std::to_string(docs.size()));
        d.title = j.value("title", "");
        if (!j.contains("text"))
            throw DataError(path + ":" + std::to_string(lineno) + ": missing \"text\"");
        d.text = j.at("text").get<std::string>();
        docs.push_back(std::move(d));
    }
    return docs;
}

void save_corpus_jsonl(const std::vector<CorpusDoc>& docs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    for (const auto& d : docs) {
        nlohmann::json j{{"id", d.id}, {"title", d.title}, {"text", d.text}};
        out << j.dump() << '\n';
    }
}

}  // namespace sparc
