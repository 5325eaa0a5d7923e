#pragma once

#include <algorithm>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "semcons/config.hpp"
#include "semcons/dataset.hpp"
#include "semcons/equivalence.hpp"
#include "semcons/errors.hpp"
#include "semcons/generation.hpp"
#include "semcons/http.hpp"
#include "semcons/metrics.hpp"
#include "semcons/report.hpp"
#include "semcons/retrieval.hpp"

namespace semcons {

struct PipelineOptions {
    bool force = false;
    bool offline = false;
    std::vector<std::string> strategy_filter; // empty = all configured strategies
    std::string baseline;                     // compare only; defaults to plain
    std::vector<std::string> variants;        // compare only; defaults to the rest
    bool quiet = false;
};

namespace pipeline_detail {

enum class Stage { Sample = 0, Corpus, Generate, Cluster, Score, Compare };

inline void log(const PipelineOptions& opts, const std::string& stage, const std::string& message) {
    if (!opts.quiet) std::cerr << "[" << stage << "] " << message << "\n";
}

inline std::vector<std::string> effective_strategies(const RunConfig& cfg,
                                                     const PipelineOptions& opts) {
    if (opts.strategy_filter.empty()) return cfg.strategies;
    for (const auto& name : opts.strategy_filter) {
        if (std::find(cfg.strategies.begin(), cfg.strategies.end(), name) ==
            cfg.strategies.end()) {
            throw ConfigError("strategy '" + name + "' is not in the configured strategy list");
        }
    }
    std::vector<std::string> out;
    for (const auto& name : cfg.strategies) { // keep config order
        if (std::find(opts.strategy_filter.begin(), opts.strategy_filter.end(), name) !=
            opts.strategy_filter.end()) {
            out.push_back(name);
        }
    }
    return out;
}

// --force invalidates the named stage and everything downstream of it.
inline void purge_from(const std::filesystem::path& run_dir, Stage stage) {
    namespace fs = std::filesystem;
    auto remove = [&](const fs::path& p) { fs::remove_all(p); };
    switch (stage) {
    case Stage::Sample: remove(run_dir / "sampled_dataset.json"); [[fallthrough]];
    case Stage::Corpus:
        remove(run_dir / "corpus.jsonl");
        remove(run_dir / "corpus_failures.jsonl");
        [[fallthrough]];
    case Stage::Generate:
        remove(run_dir / "responses");
        remove(run_dir / "generation_failures.jsonl");
        [[fallthrough]];
    case Stage::Cluster:
        remove(run_dir / "clusters");
        remove(run_dir / "judgments.jsonl");
        [[fallthrough]];
    case Stage::Score: remove(run_dir / "scores"); [[fallthrough]];
    case Stage::Compare:
        if (fs::is_directory(run_dir)) {
            for (const auto& entry : fs::directory_iterator(run_dir)) {
                std::string name = entry.path().filename().string();
                if (name.rfind("comparison_", 0) == 0) remove(entry.path());
            }
        }
        remove(run_dir / "report");
        break;
    }
}

inline SampledDataset require_sampled_dataset(const std::filesystem::path& run_dir) {
    const auto path = run_dir / "sampled_dataset.json";
    if (!std::filesystem::exists(path)) throw StageDependencyMissingError("sampled_dataset.json");
    return read_json_file(path).get<SampledDataset>();
}

// Sorted so iteration order (and thus any appended log) is deterministic.
inline std::vector<std::filesystem::path> sorted_json_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline void snapshot_config(const RunConfig& cfg) {
    write_json_file_atomic(std::filesystem::path(cfg.run_dir) / "run_config.json",
                           cfg.to_json_value());
}

} // namespace pipeline_detail

inline void cmd_sample(const RunConfig& cfg, const PipelineOptions& opts = {}) {
    namespace pd = pipeline_detail;
    cfg.validate();
    const std::filesystem::path run_dir = cfg.run_dir;
    std::filesystem::create_directories(run_dir);
    pd::snapshot_config(cfg);
    if (opts.force) pd::purge_from(run_dir, pd::Stage::Sample);

    const auto out_path = run_dir / "sampled_dataset.json";
    if (std::filesystem::exists(out_path)) {
        pd::log(opts, "sample", "sampled_dataset.json already present, skipping");
        return;
    }
    auto records = load_truthfulqa(cfg.dataset.path);
    auto sampled = sample_questions(records, cfg.dataset.per_category, cfg.dataset.min_category_size,
                                    cfg.dataset.seed);
    write_json_file_atomic(out_path, json(sampled));
    pd::log(opts, "sample",
            std::to_string(sampled.categories.size()) + " categories kept, " +
                std::to_string(sampled.dropped_categories.size()) + " dropped, " +
                std::to_string(sampled.question_count()) + " questions");
}

inline void cmd_corpus(const RunConfig& cfg, const PipelineOptions& opts = {}) {
    namespace pd = pipeline_detail;
    cfg.validate();
    const std::filesystem::path run_dir = cfg.run_dir;
    std::filesystem::create_directories(run_dir);
    if (opts.force) pd::purge_from(run_dir, pd::Stage::Corpus);

    const auto out_path = run_dir / "corpus.jsonl";
    if (std::filesystem::exists(out_path)) {
        pd::log(opts, "corpus", "corpus.jsonl already present, skipping");
        return;
    }

    std::vector<std::string> sources;
    if (!cfg.retrieval.corpus_dir.empty()) {
        sources.push_back(cfg.retrieval.corpus_dir);
    } else {
        SampledDataset dataset = pd::require_sampled_dataset(run_dir);
        std::unordered_set<std::string> seen;
        for (const auto& [category, records] : dataset.categories) {
            for (const auto& record : records) {
                for (const auto& url : record.source_urls) {
                    if (seen.insert(url).second) sources.push_back(url);
                }
            }
        }
    }

    const bool offline = cfg.retrieval.offline || opts.offline;
    FetchPolicy policy = cfg.retrieval.fetch;
    policy.offline = offline;
    HttplibFetcher fetcher(policy);
    Corpus corpus = build_corpus(sources, policy, offline ? nullptr : &fetcher);
    save_corpus_jsonl(corpus, out_path);
    if (!corpus.failures.empty()) {
        std::string lines;
        for (const auto& f : corpus.failures) {
            lines += json{{"source", f.source}, {"reason", f.reason}}.dump();
            lines.push_back('\n');
        }
        write_text_file_atomic(run_dir / "corpus_failures.jsonl", lines);
    }
    pd::log(opts, "corpus",
            std::to_string(corpus.documents.size()) + " documents, " +
                std::to_string(corpus.failures.size()) + " failures");
}

inline GenerationRun cmd_generate(const RunConfig& cfg, const PipelineOptions& opts = {}) {
    namespace pd = pipeline_detail;
    cfg.validate();
    const std::filesystem::path run_dir = cfg.run_dir;
    if (opts.force) pd::purge_from(run_dir, pd::Stage::Generate);

    if (opts.offline && cfg.backend.type == "openai") {
        throw ConfigError("--offline forbids the openai backend; use the mock backend");
    }
    SampledDataset dataset = pd::require_sampled_dataset(run_dir);
    auto strategy_names = pd::effective_strategies(cfg, opts);

    std::vector<PromptStrategy> strategies;
    bool needs_index = false;
    for (const auto& name : strategy_names) {
        strategies.push_back(PromptStrategy::from_name(name, cfg.retrieval.k));
        needs_index |= strategies.back().kind == StrategyKind::Rag;
    }

    RetrievalIndex index;
    if (needs_index) {
        const auto corpus_path = run_dir / "corpus.jsonl";
        if (!std::filesystem::exists(corpus_path)) throw StageDependencyMissingError("corpus.jsonl");
        Corpus corpus = load_corpus_jsonl(corpus_path);
        index = index_corpus(chunk_documents(corpus, cfg.retrieval.chunk_size, cfg.retrieval.overlap),
                             cfg.retrieval.k1, cfg.retrieval.b);
    }

    auto backend = make_chat_backend(cfg);
    TokenBucket limiter(cfg.generation.requests_per_second,
                        static_cast<double>(cfg.generation.parallelism));
    GenerationRun run = run_generation_batch(
        dataset, strategies, cfg.generation_params(), *backend, run_dir,
        needs_index ? &index : nullptr, cfg.generation.parallelism,
        cfg.generation.requests_per_second > 0.0 ? &limiter : nullptr);
    pd::log(opts, "generate",
            std::to_string(run.sets.size()) + " response sets (" + std::to_string(run.resumed) +
                " resumed), " + std::to_string(run.failures.size()) + " failures");
    return run;
}

inline void cmd_cluster(const RunConfig& cfg, const PipelineOptions& opts = {}) {
    namespace pd = pipeline_detail;
    cfg.validate();
    const std::filesystem::path run_dir = cfg.run_dir;
    if (opts.force) pd::purge_from(run_dir, pd::Stage::Cluster);

    if (opts.offline && cfg.judge.type == "nli") {
        throw ConfigError("--offline forbids the nli judge; use exact, normalized, or mock");
    }
    auto strategy_names = pd::effective_strategies(cfg, opts);
    std::vector<std::filesystem::path> pending;
    std::vector<std::filesystem::path> outputs;
    for (const auto& strategy : strategy_names) {
        const auto responses_dir = run_dir / "responses" / strategy;
        if (!std::filesystem::is_directory(responses_dir)) {
            throw StageDependencyMissingError("responses/" + strategy);
        }
        for (const auto& path : pd::sorted_json_files(responses_dir)) {
            auto rel = std::filesystem::relative(path, run_dir / "responses");
            auto out = run_dir / "clusters" / rel;
            if (std::filesystem::exists(out)) continue;
            pending.push_back(path);
            outputs.push_back(out);
        }
    }

    if (pending.empty()) {
        pd::log(opts, "cluster", "all clusterings already present, skipping");
        return;
    }
    auto judge = make_judge(cfg); // constructed lazily: the nli judge probes its service
    JudgmentCache cache(run_dir / "judgments.jsonl");

    std::mutex error_mutex;
    std::exception_ptr first_error;
    run_parallel(pending.size(), cfg.generation.parallelism, [&](std::size_t i) {
        try {
            ResponseSet set = read_json_file(pending[i]).get<ResponseSet>();
            Clustering clustering = cluster_responses(set.question, set.texts(), *judge, &cache,
                                                      set.question_id, set.strategy);
            write_json_file_atomic(outputs[i], json(clustering));
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);
    pd::log(opts, "cluster",
            std::to_string(pending.size()) + " clusterings written, cache size " +
                std::to_string(cache.size()));
}

inline void cmd_score(const RunConfig& cfg, const PipelineOptions& opts = {}) {
    namespace pd = pipeline_detail;
    cfg.validate();
    const std::filesystem::path run_dir = cfg.run_dir;
    if (opts.force) pd::purge_from(run_dir, pd::Stage::Score);

    SampledDataset dataset = pd::require_sampled_dataset(run_dir);
    std::unordered_map<std::string, std::string> category_of;
    for (const auto& [category, records] : dataset.categories) {
        for (const auto& record : records) category_of[record.id] = category;
    }

    for (const auto& strategy : pd::effective_strategies(cfg, opts)) {
        const auto clusters_dir = run_dir / "clusters" / strategy;
        if (!std::filesystem::is_directory(clusters_dir)) {
            throw StageDependencyMissingError("clusters/" + strategy);
        }
        const auto out_path = run_dir / "scores" / (strategy + ".csv");
        if (std::filesystem::exists(out_path)) {
            pd::log(opts, "score", "scores/" + strategy + ".csv already present, skipping");
            continue;
        }
        std::vector<ConsistencyScore> scores;
        for (const auto& path : pd::sorted_json_files(clusters_dir)) {
            Clustering clustering = read_json_file(path).get<Clustering>();
            ConsistencyScore score = semantic_consistency(clustering);
            auto it = category_of.find(score.question_id);
            if (it == category_of.end()) {
                throw Error("UnknownQuestion",
                            "clustering for unknown question id " + score.question_id);
            }
            score.category = it->second;
            scores.push_back(std::move(score));
        }
        std::sort(scores.begin(), scores.end(),
                  [](const auto& a, const auto& b) { return a.question_id < b.question_id; });
        write_text_file_atomic(out_path, scores_to_csv(scores));
        pd::log(opts, "score", "scores/" + strategy + ".csv: " + std::to_string(scores.size()) +
                                   " questions");
    }
}

namespace pipeline_detail {

inline std::vector<CategoryScore> load_category_scores(const std::filesystem::path& run_dir,
                                                       const std::string& strategy) {
    const auto path = run_dir / "scores" / (strategy + ".csv");
    if (!std::filesystem::exists(path)) {
        throw StageDependencyMissingError("scores/" + strategy + ".csv");
    }
    auto scores = scores_from_csv(read_text_file(path), strategy);
    std::map<std::string, std::vector<ConsistencyScore>> by_category;
    for (auto& s : scores) by_category[s.category].push_back(std::move(s));
    std::vector<CategoryScore> out;
    out.reserve(by_category.size());
    for (const auto& [category, group] : by_category) out.push_back(category_mean(group));
    return out;
}

} // namespace pipeline_detail

inline void cmd_compare(const RunConfig& cfg, const PipelineOptions& opts = {}) {
    namespace pd = pipeline_detail;
    namespace fs = std::filesystem;
    cfg.validate();
    const fs::path run_dir = cfg.run_dir;
    if (opts.force) pd::purge_from(run_dir, pd::Stage::Compare);

    auto strategy_names = pd::effective_strategies(cfg, opts);
    std::string baseline = opts.baseline;
    if (baseline.empty()) {
        baseline = std::find(strategy_names.begin(), strategy_names.end(), "plain") !=
                           strategy_names.end()
                       ? "plain"
                       : strategy_names.front();
    }
    std::vector<std::string> variants = opts.variants;
    if (variants.empty()) {
        for (const auto& name : strategy_names) {
            if (name != baseline) variants.push_back(name);
        }
    }
    if (variants.empty()) throw ConfigError("compare needs at least one variant strategy");

    std::vector<fs::path> expected{run_dir / "report" / "table1.txt",
                                   run_dir / "report" / "table1.csv",
                                   run_dir / "report" / "table2.txt",
                                   run_dir / "report" / "table2.csv",
                                   run_dir / "report" / "figure3_deltas.csv",
                                   run_dir / "report" / "manifest.json"};
    for (const auto& variant : variants) {
        expected.push_back(run_dir / ("comparison_" + baseline + "_vs_" + variant + ".json"));
    }
    if (std::all_of(expected.begin(), expected.end(),
                    [](const fs::path& p) { return fs::exists(p); })) {
        pd::log(opts, "compare", "comparison and report files already present, skipping");
        return;
    }

    auto baseline_scores = pd::load_category_scores(run_dir, baseline);
    std::vector<ComparisonReport> reports;
    for (const auto& variant : variants) {
        auto variant_scores = pd::load_category_scores(run_dir, variant);
        ComparisonReport report = compare_strategies(baseline_scores, variant_scores);
        write_json_file_atomic(run_dir / ("comparison_" + baseline + "_vs_" + variant + ".json"),
                               json(report));
        reports.push_back(std::move(report));
    }

    RenderedTable table1 = emit_table1(reports);
    write_text_file_atomic(run_dir / "report" / "table1.txt", table1.text);
    write_text_file_atomic(run_dir / "report" / "table1.csv", table1.csv);

    std::vector<StrategyBins> bins{reports.front().baseline_bins};
    for (const auto& report : reports) bins.push_back(report.variant_bins);
    RenderedTable table2 = emit_table2(bins);
    write_text_file_atomic(run_dir / "report" / "table2.txt", table2.text);
    write_text_file_atomic(run_dir / "report" / "table2.csv", table2.csv);

    write_text_file_atomic(run_dir / "report" / "figure3_deltas.csv",
                           emit_delta_plot_data(reports));
    write_manifest(run_dir);
    pd::log(opts, "compare",
            "wrote " + std::to_string(variants.size()) + " comparison(s) and report files");
}

// The full pipeline; each stage skips work whose artifacts already exist,
// so an interrupted run resumes where it stopped.
inline void cmd_run(const RunConfig& cfg, const PipelineOptions& opts = {}) {
    namespace pd = pipeline_detail;
    cfg.validate();

    PipelineOptions stage_opts = opts;
    cmd_sample(cfg, stage_opts);
    stage_opts.force = false; // the sample-stage purge already cascaded downstream

    auto strategy_names = pd::effective_strategies(cfg, opts);
    bool needs_corpus = std::find(strategy_names.begin(), strategy_names.end(), "rag") !=
                        strategy_names.end();
    if (needs_corpus) cmd_corpus(cfg, stage_opts);
    cmd_generate(cfg, stage_opts);
    cmd_cluster(cfg, stage_opts);
    cmd_score(cfg, stage_opts);
    cmd_compare(cfg, stage_opts);
}

} // namespace semcons
