#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "sparc/bench.hpp"
#include "sparc/corpus.hpp"
#include "sparc/errors.hpp"
#include "sparc/eval.hpp"
#include "sparc/index.hpp"
#include "sparc/model.hpp"
#include "sparc/search.hpp"
#include "sparc/synthetic.hpp"
#include "sparc/train.hpp"
#include "sparc/vocab.hpp"

namespace py = pybind11;

namespace {

sparc::SearchConfig search_config(const std::string& strategy, int k, int top_docs,
                                  int top_phrases, double lambda_sparse, double lambda_doc,
                                  int threads) {
    sparc::SearchConfig cfg;
    cfg.strategy = sparc::strategy_from_name(strategy);
    cfg.k = k;
    cfg.top_docs = top_docs;
    cfg.top_phrases = top_phrases;
    cfg.lambda_sparse = lambda_sparse;
    cfg.lambda_doc = lambda_doc;
    cfg.threads = threads;
    return cfg;
}

py::dict hit_to_dict(const sparc::QueryHit& h) {
    py::dict d;
    d["answer"] = h.answer;
    d["doc_id"] = h.doc_id;
    d["title"] = h.title;
    d["char_begin"] = h.char_begin;
    d["char_end"] = h.char_end;
    d["dense"] = h.dense;
    d["sparse"] = h.sparse;
    d["doc_tfidf"] = h.doc_tfidf;
    d["combined"] = h.combined;
    return d;
}

std::vector<sparc::QaRecord> records_from_path(const std::string& path,
                                               const std::string& format) {
    if (format == "squad") return sparc::load_squad_json(path);
    return sparc::load_qa_jsonl(path);
}

}  // namespace

PYBIND11_MODULE(_sparc, m) {
    m.doc() = "phrase-retrieval QA engine with contextualized sparse representations";

    py::register_exception<sparc::UsageError>(m, "SparcUsageError", PyExc_ValueError);
    py::register_exception<sparc::DataError>(m, "SparcDataError", PyExc_RuntimeError);

    py::class_<sparc::Vocabulary>(m, "Vocabulary")
        .def("__len__", [](const sparc::Vocabulary& v) { return v.size(); })
        .def("id", [](const sparc::Vocabulary& v, const std::string& t) { return v.lookup(t); })
        .def("token",
             [](const sparc::Vocabulary& v, sparc::TokenId id) {
                 if (id >= v.size()) throw sparc::UsageError("token id out of range");
                 return v.id_to_token[id];
             })
        .def("save", &sparc::save_vocab)
        .def_static("load", &sparc::load_vocab);

    m.def(
        "build_vocab",
        [](const std::vector<std::string>& tokens, std::size_t max_size) {
            return sparc::build_vocab(tokens, max_size);
        },
        py::arg("tokens"), py::arg("max_size") = 30522);

    m.def(
        "build_vocab_from_corpus",
        [](const std::string& corpus_path, std::size_t max_size) {
            std::vector<std::string> tokens;
            for (const auto& d : sparc::load_corpus_jsonl(corpus_path))
                for (const auto& t : sparc::split_text(d.text)) tokens.push_back(t.text);
            return sparc::build_vocab(tokens, max_size);
        },
        py::arg("corpus_path"), py::arg("max_size") = 30522);

    m.def(
        "tokenize",
        [](const std::string& text, const sparc::Vocabulary& vocab, bool is_question) {
            const sparc::TokenSeq seq = sparc::tokenize(text, vocab, is_question);
            py::list out;
            for (std::size_t i = 0; i < seq.size(); ++i) {
                py::dict t;
                t["id"] = seq.ids[i];
                t["begin"] = seq.char_begin[i];
                t["end"] = seq.char_end[i];
                out.append(t);
            }
            return out;
        },
        py::arg("text"), py::arg("vocab"), py::arg("is_question") = false);

    py::class_<sparc::ModelParams, std::shared_ptr<sparc::ModelParams>>(m, "Model")
        .def("save",
             [](const sparc::ModelParams& p, const std::string& path) { sparc::save_model(p, path); })
        .def_static("load",
                    [](const std::string& path) {
                        return std::make_shared<sparc::ModelParams>(sparc::load_model(path));
                    })
        .def_property_readonly("hash",
                               [](const sparc::ModelParams& p) { return sparc::model_hash(p); })
        .def_property_readonly("orders",
                               [](const sparc::ModelParams& p) { return p.cfg.orders; });

    m.def(
        "init_model",
        [](const sparc::Vocabulary& vocab, int d, int d_ff, int layers, int max_seq_len, int d_p,
           const std::vector<int>& orders, int max_span_len, std::uint64_t seed) {
            sparc::ModelConfig cfg;
            cfg.enc.d = d;
            cfg.enc.d_ff = d_ff;
            cfg.enc.layers = layers;
            cfg.enc.max_seq_len = max_seq_len;
            cfg.d_p = d_p;
            cfg.orders = orders;
            cfg.max_span_len = max_span_len;
            cfg.seed = seed;
            return std::make_shared<sparc::ModelParams>(sparc::init_model(cfg, vocab));
        },
        py::arg("vocab"), py::arg("d") = 64, py::arg("d_ff") = 128, py::arg("layers") = 2,
        py::arg("max_seq_len") = 128, py::arg("d_p") = 32,
        py::arg("orders") = std::vector<int>{1, 2}, py::arg("max_span_len") = 20,
        py::arg("seed") = 0);

    m.def(
        "train",
        [](std::shared_ptr<sparc::ModelParams> model, const std::string& dataset_path,
           const std::string& format, double lr, int epochs, int batch_size, std::uint64_t seed,
           double dense_only_weight, const std::string& neg_mode, double tfidf_coeff,
           int threads) {
            sparc::TrainConfig tc;
            tc.lr = lr;
            tc.epochs = epochs;
            tc.batch_size = batch_size;
            tc.seed = seed;
            tc.dense_only_weight = dense_only_weight;
            tc.neg_mode = neg_mode == "none"    ? sparc::NegMode::None
                          : neg_mode == "tfidf" ? sparc::NegMode::Tfidf
                                                : sparc::NegMode::Dense;
            tc.tfidf_coeff = tfidf_coeff;
            tc.threads = threads;
            std::vector<sparc::TrainingExample> examples;
            for (const auto& r : records_from_path(dataset_path, format)) {
                auto ex = sparc::make_training_example(r, model->vocab);
                if (ex) examples.push_back(std::move(*ex));
            }
            return sparc::train(examples, *model, tc).epoch_mean_loss;
        },
        py::arg("model"), py::arg("dataset_path"), py::arg("format") = "jsonl",
        py::arg("lr") = 1e-3, py::arg("epochs") = 20, py::arg("batch_size") = 8,
        py::arg("seed") = 0, py::arg("dense_only_weight") = 1.0, py::arg("neg_mode") = "dense",
        py::arg("tfidf_coeff") = 1.0, py::arg("threads") = 1);

    py::class_<sparc::PhraseIndex, std::shared_ptr<sparc::PhraseIndex>>(m, "Index")
        .def("__len__", [](const sparc::PhraseIndex& i) { return i.entries.size(); })
        .def("save",
             [](const sparc::PhraseIndex& i, const std::string& path) { sparc::save_index(i, path); })
        .def_static("load",
                    [](const std::string& path) {
                        return std::make_shared<sparc::PhraseIndex>(sparc::load_index(path));
                    })
        .def_property_readonly(
            "model_hash", [](const sparc::PhraseIndex& i) { return i.meta.model_hash; });

    m.def(
        "build_index",
        [](const std::string& corpus_path, std::shared_ptr<sparc::ModelParams> model,
           std::uint32_t prune_k, const std::string& tfidf_unit, int threads) {
            sparc::IndexBuildConfig cfg;
            cfg.prune_k = prune_k;
            cfg.tfidf_unit = tfidf_unit;
            cfg.threads = threads;
            return std::make_shared<sparc::PhraseIndex>(
                sparc::build_index(sparc::load_corpus_jsonl(corpus_path), *model, cfg));
        },
        py::arg("corpus_path"), py::arg("model"), py::arg("prune_k") = 100,
        py::arg("tfidf_unit") = "record", py::arg("threads") = 1);

    m.def(
        "query",
        [](std::shared_ptr<sparc::PhraseIndex> index, std::shared_ptr<sparc::ModelParams> model,
           const std::string& question, const std::string& strategy, int k, int top_docs,
           int top_phrases, double lambda_sparse, double lambda_doc, int threads) {
            const auto cfg = search_config(strategy, k, top_docs, top_phrases, lambda_sparse,
                                           lambda_doc, threads);
            const auto artifacts = sparc::make_query_artifacts(question, *model, *index);
            py::list out;
            for (const auto& hit : sparc::search(artifacts, *index, cfg).hits)
                out.append(hit_to_dict(hit));
            return out;
        },
        py::arg("index"), py::arg("model"), py::arg("question"), py::arg("strategy") = "hybrid",
        py::arg("k") = 5, py::arg("top_docs") = 10, py::arg("top_phrases") = 1000,
        py::arg("lambda_sparse") = 1.0, py::arg("lambda_doc") = 1.0, py::arg("threads") = 1);

    m.def(
        "evaluate",
        [](std::shared_ptr<sparc::PhraseIndex> index, std::shared_ptr<sparc::ModelParams> model,
           const std::string& dataset_path, const std::string& format, const std::string& strategy,
           int k, int top_docs, int top_phrases, double lambda_sparse, double lambda_doc,
           const std::string& ablation) {
            const auto cfg =
                search_config(strategy, k, top_docs, top_phrases, lambda_sparse, lambda_doc, 1);
            const auto report = sparc::evaluate(records_from_path(dataset_path, format), *index,
                                                *model, cfg, ablation);
            py::dict d;
            d["em"] = report.em_percent;
            d["f1"] = report.f1_percent;
            d["n"] = report.n;
            d["strategy"] = report.strategy;
            d["ablation"] = report.ablation;
            d["latency_mean_s"] = report.latency_mean;
            d["latency_median_s"] = report.latency_median;
            d["latency_p95_s"] = report.latency_p95;
            return d;
        },
        py::arg("index"), py::arg("model"), py::arg("dataset_path"), py::arg("format") = "jsonl",
        py::arg("strategy") = "hybrid", py::arg("k") = 5, py::arg("top_docs") = 10,
        py::arg("top_phrases") = 1000, py::arg("lambda_sparse") = 1.0,
        py::arg("lambda_doc") = 1.0, py::arg("ablation") = "full");

    m.def(
        "benchmark",
        [](std::shared_ptr<sparc::PhraseIndex> index, std::shared_ptr<sparc::ModelParams> model,
           const std::vector<std::string>& questions, const std::string& strategy, int k,
           int top_docs, int top_phrases, int repetitions, int warmup) {
            const auto cfg = search_config(strategy, k, top_docs, top_phrases, 1.0, 1.0, 1);
            const auto stats =
                sparc::benchmark(questions, *index, *model, cfg, repetitions, warmup);
            py::dict d;
            d["mean_s"] = stats.mean_s;
            d["median_s"] = stats.median_s;
            d["p95_s"] = stats.p95_s;
            d["measurements"] = stats.measurements;
            return d;
        },
        py::arg("index"), py::arg("model"), py::arg("questions"), py::arg("strategy") = "hybrid",
        py::arg("k") = 5, py::arg("top_docs") = 10, py::arg("top_phrases") = 1000,
        py::arg("repetitions") = 3, py::arg("warmup") = 1);

    m.def(
        "generate_synthetic",
        [](int num_docs, int entities_per_doc, double distractor_density, std::uint64_t seed,
           const std::string& out_corpus, const std::string& out_train,
           const std::string& out_dev) {
            sparc::SyntheticSpec spec;
            spec.num_docs = num_docs;
            spec.entities_per_doc = entities_per_doc;
            spec.distractor_density = distractor_density;
            spec.seed = seed;
            const auto data = sparc::generate_synthetic(spec);
            sparc::save_corpus_jsonl(data.corpus, out_corpus);
            sparc::save_qa_jsonl(data.train, out_train);
            sparc::save_qa_jsonl(data.dev, out_dev);
            py::dict d;
            d["docs"] = data.corpus.size();
            d["train_questions"] = data.train.size();
            d["dev_questions"] = data.dev.size();
            return d;
        },
        py::arg("num_docs") = 50, py::arg("entities_per_doc") = 4,
        py::arg("distractor_density") = 0.5, py::arg("seed") = 0, py::arg("out_corpus"),
        py::arg("out_train"), py::arg("out_dev"));

    m.def("normalize_answer",
          [](const std::string& text) { return sparc::normalize_answer(text); });
    m.def("exact_match", [](const std::string& prediction, const std::vector<std::string>& golds) {
        return sparc::exact_match(prediction, golds);
    });
    m.def("f1_score", [](const std::string& prediction, const std::vector<std::string>& golds) {
        return sparc::f1_score(prediction, golds);
    });
}
