// semcons — semantic-consistency evaluation pipeline for LLM question
// answering. Subcommands mirror the pipeline stages; `run` chains them.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcons/config.hpp"
#include "semcons/pipeline.hpp"

namespace {

struct CliArgs {
    std::string config_path = "semcons.json";
    semcons::PipelineOptions opts;
};

void add_common_options(CLI::App* cmd, CliArgs& args, bool with_strategy = true) {
    cmd->add_option("--config", args.config_path, "Path to the run configuration JSON")
        ->capture_default_str();
    cmd->add_flag("--force", args.opts.force,
                  "Rebuild this stage's artifacts and everything downstream");
    cmd->add_flag("--offline", args.opts.offline, "Disable all network access");
    cmd->add_flag("--quiet", args.opts.quiet, "Suppress progress messages");
    if (with_strategy) {
        cmd->add_option("--strategy", args.opts.strategy_filter,
                        "Restrict to a strategy (repeatable): plain, rag, cot");
    }
}

int fail_with_record(const std::string& code, const std::string& message) {
    semcons::json record{{"error", {{"code", code}, {"message", message}}}};
    std::cerr << record.dump() << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic consistency evaluation for LLM question answering"};
    app.require_subcommand(1);

    CliArgs args;

    auto* sample = app.add_subcommand("sample", "Load the dataset CSV and sample questions");
    add_common_options(sample, args, false);
    auto* corpus = app.add_subcommand("corpus", "Build the retrieval corpus");
    add_common_options(corpus, args, false);
    auto* generate = app.add_subcommand("generate", "Sample n responses per question");
    add_common_options(generate, args);
    auto* cluster = app.add_subcommand("cluster", "Cluster responses by semantic equivalence");
    add_common_options(cluster, args);
    auto* score = app.add_subcommand("score", "Compute per-question consistency scores");
    add_common_options(score, args);
    auto* compare = app.add_subcommand("compare", "Compare strategies and write report files");
    add_common_options(compare, args);
    compare->add_option("--baseline", args.opts.baseline, "Baseline strategy (default: plain)");
    compare->add_option("--variant", args.opts.variants,
                        "Variant strategy to compare against the baseline (repeatable)");
    auto* run = app.add_subcommand("run", "Run the full pipeline");
    add_common_options(run, args);

    CLI11_PARSE(app, argc, argv);

    try {
        semcons::RunConfig cfg = semcons::RunConfig::load(args.config_path);
        if (sample->parsed()) semcons::cmd_sample(cfg, args.opts);
        else if (corpus->parsed()) semcons::cmd_corpus(cfg, args.opts);
        else if (generate->parsed()) semcons::cmd_generate(cfg, args.opts);
        else if (cluster->parsed()) semcons::cmd_cluster(cfg, args.opts);
        else if (score->parsed()) semcons::cmd_score(cfg, args.opts);
        else if (compare->parsed()) semcons::cmd_compare(cfg, args.opts);
        else if (run->parsed()) semcons::cmd_run(cfg, args.opts);
        return 0;
    } catch (const semcons::Error& e) {
        return fail_with_record(e.code(), e.what());
    } catch (const std::exception& e) {
        return fail_with_record("Internal", e.what());
    }
}
