#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparc/bench.hpp"
#include "sparc/bytes.hpp"
#include "sparc/corpus.hpp"
#include "sparc/errors.hpp"
#include "sparc/eval.hpp"
#include "sparc/index.hpp"
#include "sparc/model.hpp"
#include "sparc/search.hpp"
#include "sparc/synthetic.hpp"
#include "sparc/train.hpp"
#include "sparc/vocab.hpp"

namespace {

std::vector<int> parse_orders(const std::string& text) {
    std::vector<int> orders;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string piece = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!piece.empty()) orders.push_back(std::stoi(piece));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (orders.empty()) throw sparc::UsageError("orders must name at least one n-gram order");
    return orders;
}

std::vector<sparc::QaRecord> load_dataset(const std::string& path, const std::string& format) {
    if (format == "squad") return sparc::load_squad_json(path);
    if (format == "jsonl") return sparc::load_qa_jsonl(path);
    throw sparc::UsageError("dataset format must be 'jsonl' or 'squad'");
}

sparc::NegMode parse_neg_mode(const std::string& name) {
    if (name == "none") return sparc::NegMode::None;
    if (name == "tfidf") return sparc::NegMode::Tfidf;
    if (name == "dense") return sparc::NegMode::Dense;
    throw sparc::UsageError("neg-mode must be none, tfidf, or dense");
}

std::vector<std::string> tokens_of_corpus(const std::vector<sparc::CorpusDoc>& docs) {
    std::vector<std::string> tokens;
    for (const auto& d : docs)
        for (const auto& t : sparc::split_text(d.text)) tokens.push_back(t.text);
    return tokens;
}

int run(int argc, char** argv) {
    CLI::App app{"phrase-retrieval QA engine with contextualized sparse representations"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file with a section per subcommand");
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "global random seed")->capture_default_str();

    // ---- vocab ----
    auto* cmd_vocab = app.add_subcommand("vocab", "build a vocabulary from a JSONL corpus");
    std::string vocab_corpus, vocab_out, vocab_dataset, vocab_format = "jsonl";
    std::size_t vocab_max = 30522;
    cmd_vocab->add_option("--corpus", vocab_corpus)->required();
    cmd_vocab->add_option("--out", vocab_out)->required();
    cmd_vocab->add_option("--max-size", vocab_max)->capture_default_str();
    cmd_vocab->add_option("--dataset", vocab_dataset,
                          "also feed a QA dataset's question/context tokens");
    cmd_vocab->add_option("--format", vocab_format)->capture_default_str();

    // ---- train ----
    auto* cmd_train = app.add_subcommand("train", "train encoder, sparse and dense heads");
    std::string train_dataset, train_format = "jsonl", train_vocab, train_out;
    sparc::TrainConfig tc;
    sparc::ModelConfig mc;
    std::string train_orders = "1,2", train_neg = "dense";
    cmd_train->add_option("--dataset", train_dataset)->required();
    cmd_train->add_option("--format", train_format, "jsonl or squad")->capture_default_str();
    cmd_train->add_option("--vocab", train_vocab)->required();
    cmd_train->add_option("--out", train_out)->required();
    cmd_train->add_option("--epochs", tc.epochs)->capture_default_str();
    cmd_train->add_option("--lr", tc.lr)->capture_default_str();
    cmd_train->add_option("--batch", tc.batch_size)->capture_default_str();
    cmd_train->add_option("--lambda-dense", tc.dense_only_weight)->capture_default_str();
    cmd_train->add_option("--neg-mode", train_neg, "none, tfidf, or dense")->capture_default_str();
    cmd_train->add_option("--tfidf-coeff", tc.tfidf_coeff)->capture_default_str();
    cmd_train->add_option("--threads", tc.threads)->capture_default_str();
    cmd_train->add_option("--orders", train_orders, "n-gram orders, e.g. 1,2,3")
        ->capture_default_str();
    cmd_train->add_option("--span-len", mc.max_span_len, "max phrase length J")
        ->capture_default_str();
    cmd_train->add_option("--d", mc.enc.d)->capture_default_str();
    cmd_train->add_option("--d-ff", mc.enc.d_ff)->capture_default_str();
    cmd_train->add_option("--layers", mc.enc.layers)->capture_default_str();
    cmd_train->add_option("--max-seq-len", mc.enc.max_seq_len)->capture_default_str();
    cmd_train->add_option("--d-p", mc.d_p)->capture_default_str();

    // ---- index ----
    auto* cmd_index = app.add_subcommand("index", "build a phrase index from a corpus");
    std::string index_corpus, index_model, index_out;
    sparc::IndexBuildConfig ic;
    cmd_index->add_option("--corpus", index_corpus)->required();
    cmd_index->add_option("--model", index_model)->required();
    cmd_index->add_option("--out", index_out)->required();
    cmd_index->add_option("--prune-k", ic.prune_k, "postings kept per position/order; 0 keeps all")
        ->capture_default_str();
    cmd_index->add_option("--tfidf-unit", ic.tfidf_unit, "record or window")
        ->capture_default_str();
    cmd_index->add_option("--threads", ic.threads)->capture_default_str();

    // ---- shared search options ----
    sparc::SearchConfig sc;
    std::string strategy_name_opt = "hybrid";
    auto add_search_options = [&](CLI::App* cmd) {
        cmd->add_option("--strategy", strategy_name_opt, "sfs, dfs, hybrid, or exhaustive")
            ->capture_default_str();
        cmd->add_option("--k", sc.k)->capture_default_str();
        cmd->add_option("--top-docs", sc.top_docs)->capture_default_str();
        cmd->add_option("--top-phrases", sc.top_phrases)->capture_default_str();
        cmd->add_option("--lambda-sparse", sc.lambda_sparse)->capture_default_str();
        cmd->add_option("--lambda-doc", sc.lambda_doc)->capture_default_str();
        cmd->add_option("--threads", sc.threads)->capture_default_str();
    };

    // ---- query ----
    auto* cmd_query = app.add_subcommand("query", "answer a single question");
    std::string query_index, query_model, query_question;
    cmd_query->add_option("--index", query_index)->required();
    cmd_query->add_option("--model", query_model)->required();
    cmd_query->add_option("--question", query_question)->required();
    add_search_options(cmd_query);

    // ---- eval ----
    auto* cmd_eval = app.add_subcommand("eval", "EM/F1 over a QA dataset");
    std::string eval_index, eval_model, eval_dataset, eval_format = "jsonl";
    std::string eval_ablation = "full", eval_out;
    bool eval_records = false;
    cmd_eval->add_option("--index", eval_index)->required();
    cmd_eval->add_option("--model", eval_model)->required();
    cmd_eval->add_option("--dataset", eval_dataset)->required();
    cmd_eval->add_option("--format", eval_format)->capture_default_str();
    cmd_eval->add_option("--ablation", eval_ablation,
                         "report tag: full, no-sparc, no-doc-tfidf, trigram")
        ->capture_default_str();
    cmd_eval->add_option("--out", eval_out, "write the JSON report here");
    cmd_eval->add_flag("--records", eval_records, "include per-question records");
    add_search_options(cmd_eval);

    // ---- synth ----
    auto* cmd_synth = app.add_subcommand("synth", "generate the synthetic benchmark");
    sparc::SyntheticSpec spec;
    std::string synth_corpus, synth_train, synth_dev;
    cmd_synth->add_option("--docs", spec.num_docs)->capture_default_str();
    cmd_synth->add_option("--entities", spec.entities_per_doc)->capture_default_str();
    cmd_synth->add_option("--distractor-density", spec.distractor_density)->capture_default_str();
    cmd_synth->add_option("--out-corpus", synth_corpus)->required();
    cmd_synth->add_option("--out-train", synth_train)->required();
    cmd_synth->add_option("--out-dev", synth_dev)->required();

    // ---- bench ----
    auto* cmd_bench = app.add_subcommand("bench", "seconds-per-query statistics");
    std::string bench_index, bench_model, bench_dataset, bench_format = "jsonl";
    int bench_reps = 3, bench_warmup = 1;
    bool bench_single_cpu = false;
    cmd_bench->add_option("--index", bench_index)->required();
    cmd_bench->add_option("--model", bench_model)->required();
    cmd_bench->add_option("--dataset", bench_dataset)->required();
    cmd_bench->add_option("--format", bench_format)->capture_default_str();
    cmd_bench->add_option("--repetitions", bench_reps)->capture_default_str();
    cmd_bench->add_option("--warmup", bench_warmup)->capture_default_str();
    cmd_bench->add_flag("--single-cpu", bench_single_cpu, "pin search to one worker");
    add_search_options(cmd_bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors are exit 1; --help is 0
    }
    tc.seed = seed;
    mc.seed = seed;
    spec.seed = seed;
    sc.strategy = sparc::strategy_from_name(strategy_name_opt);

    if (cmd_vocab->parsed()) {
        const auto docs = sparc::load_corpus_jsonl(vocab_corpus);
        auto tokens = tokens_of_corpus(docs);
        if (!vocab_dataset.empty()) {
            for (const auto& r : load_dataset(vocab_dataset, vocab_format)) {
                for (const auto& t : sparc::split_text(r.question)) tokens.push_back(t.text);
                for (const auto& t : sparc::split_text(r.context)) tokens.push_back(t.text);
            }
        }
        const auto vocab = sparc::build_vocab(tokens, vocab_max);
        sparc::save_vocab(vocab, vocab_out);
        std::printf("vocab: %zu tokens -> %s\n", vocab.size(), vocab_out.c_str());
    } else if (cmd_train->parsed()) {
        mc.orders = parse_orders(train_orders);
        tc.neg_mode = parse_neg_mode(train_neg);
        const auto vocab = sparc::load_vocab(train_vocab);
        const auto records = load_dataset(train_dataset, train_format);
        std::vector<sparc::TrainingExample> examples;
        std::size_t skipped = 0;
        for (const auto& r : records) {
            auto ex = sparc::make_training_example(r, vocab);
            if (ex)
                examples.push_back(std::move(*ex));
            else
                ++skipped;
        }
        if (skipped > 0)
            std::fprintf(stderr, "skipped %zu examples with unaligned answers\n", skipped);
        auto model = sparc::init_model(mc, vocab);
        const auto result = sparc::train(examples, model, tc);
        sparc::save_model(model, train_out);
        for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
            std::printf("epoch %zu mean loss %.6f\n", e + 1, result.epoch_mean_loss[e]);
        std::printf("model -> %s\n", train_out.c_str());
    } else if (cmd_index->parsed()) {
        const auto model = sparc::load_model(index_model);
        const auto corpus = sparc::load_corpus_jsonl(index_corpus);
        const auto index = sparc::build_index(corpus, model, ic);
        sparc::save_index(index, index_out);
        std::printf("index: %zu entries -> %s\n", index.entries.size(), index_out.c_str());
    } else if (cmd_query->parsed()) {
        const auto model = sparc::load_model(query_model);
        const auto index = sparc::load_index(query_index);
        const auto artifacts = sparc::make_query_artifacts(query_question, model, index);
        const auto result = sparc::search(artifacts, index, sc);
        for (const auto& hit : result.hits) {
            nlohmann::json j{{"answer", hit.answer},
                             {"doc_id", hit.doc_id},
                             {"title", hit.title},
                             {"char_begin", hit.char_begin},
                             {"char_end", hit.char_end},
                             {"dense", hit.dense},
                             {"sparse", hit.sparse},
                             {"doc_tfidf", hit.doc_tfidf},
                             {"combined", hit.combined}};
            std::printf("%s\n", j.dump().c_str());
        }
    } else if (cmd_eval->parsed()) {
        const auto model = sparc::load_model(eval_model);
        const auto index = sparc::load_index(eval_index);
        const auto dataset = load_dataset(eval_dataset, eval_format);
        const auto report = sparc::evaluate(dataset, index, model, sc, eval_ablation);
        const std::string json = sparc::eval_report_json(report, eval_records);
        if (!eval_out.empty()) {
            std::vector<std::uint8_t> bytes(json.begin(), json.end());
            sparc::write_file_bytes(eval_out, bytes);
        }
        std::printf("%s\n", json.c_str());
    } else if (cmd_synth->parsed()) {
        const auto data = sparc::generate_synthetic(spec);
        sparc::save_corpus_jsonl(data.corpus, synth_corpus);
        sparc::save_qa_jsonl(data.train, synth_train);
        sparc::save_qa_jsonl(data.dev, synth_dev);
        std::printf("synthetic: %zu docs, %zu train, %zu dev questions\n", data.corpus.size(),
                    data.train.size(), data.dev.size());
    } else if (cmd_bench->parsed()) {
        const auto model = sparc::load_model(bench_model);
        const auto index = sparc::load_index(bench_index);
        const auto dataset = load_dataset(bench_dataset, bench_format);
        std::vector<std::string> questions;
        for (const auto& r : dataset) questions.push_back(r.question);
        if (bench_single_cpu) sc.threads = 1;
        const auto stats = sparc::benchmark(questions, index, model, sc, bench_reps, bench_warmup);
        nlohmann::json j{{"strategy", strategy_name_opt},
                         {"measurements", stats.measurements},
                         {"mean_s", stats.mean_s},
                         {"median_s", stats.median_s},
                         {"p95_s", stats.p95_s}};
        std::printf("%s\n", j.dump().c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const sparc::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const sparc::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const sparc::InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}
