#pragma once

#include <string>
#include <vector>

namespace sparc {

/// One retrieval unit, typically a paragraph.
struct CorpusDoc {
    std::string id;
    std::string title;
    std::string text;
};

/// Reads JSONL records {"id": ..., "title": ..., "text": ...}.
std::vector<CorpusDoc> load_corpus_jsonl(const std::string& path);
void save_corpus_jsonl(const std::vector<CorpusDoc>& docs, const std::string& path);

}  // namespace sparc
