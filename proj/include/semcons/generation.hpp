#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semcons/backends.hpp"
#include "semcons/dataset.hpp"
#include "semcons/errors.hpp"
#include "semcons/http.hpp"
#include "semcons/json_io.hpp"
#include "semcons/retrieval.hpp"
#include "semcons/text.hpp"

namespace semcons {

enum class StrategyKind { Plain, Rag, ZeroShotCot };

// One of the three response-elicitation strategies. Rag carries the
// retrieval depth; ZeroShotCot always runs two stages per sample.
struct PromptStrategy {
    StrategyKind kind = StrategyKind::Plain;
    int rag_k = 3;
    std::vector<std::string> stage_templates;

    static PromptStrategy plain() { return {StrategyKind::Plain, 0, {"plain:v1"}}; }
    static PromptStrategy rag(int k = 3) { return {StrategyKind::Rag, k, {"rag:v1"}}; }
    static PromptStrategy zero_shot_cot() {
        return {StrategyKind::ZeroShotCot, 0, {"cot-reason:v1", "cot-answer:v1"}};
    }

    static PromptStrategy from_name(const std::string& name, int rag_k = 3) {
        if (name == "plain") return plain();
        if (name == "rag") return rag(rag_k);
        if (name == "cot") return zero_shot_cot();
        throw ConfigError("unknown strategy '" + name + "' (expected plain, rag, or cot)");
    }

    std::string name() const {
        switch (kind) {
        case StrategyKind::Plain: return "plain";
        case StrategyKind::Rag: return "rag";
        case StrategyKind::ZeroShotCot: return "cot";
        }
        return "unknown";
    }
};

enum class SeedPolicy { BackendDefault, PerSample };

struct GenerationParams {
    double temperature = 1.0;
    int max_tokens = 256;
    int n = 5; // samples per (question, strategy); the metric needs >= 2
    std::string model_name = "default";
    SeedPolicy seed_policy = SeedPolicy::BackendDefault;
    int max_retries = 3;
    int retry_backoff_ms = 250;

    void validate() const {
        if (n < 2) throw DegenerateSampleSizeError(n);
        if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
        if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    }
};

struct Prompt {
    std::string text;
    std::string template_id;
};

inline constexpr const char* kRagInstruction =
    "Answer the question based only on the following context:";
inline constexpr const char* kCotTrigger = "Let's think step by step";
inline constexpr const char* kCotAnswerCue = "Therefore, the answer is";

inline Prompt build_plain_prompt(const std::string& question) {
    return {"Question: " + trim(question) + "\nAnswer:", "plain:v1"};
}

// Instruction first, then the retrieved chunks joined by blank lines,
// then the question. An empty context list is made explicit rather than
// silently producing a context-free prompt.
inline Prompt build_rag_prompt(const std::string& question,
                               const std::vector<std::string>& contexts) {
    std::string text = kRagInstruction;
    text.push_back('\n');
    if (contexts.empty()) {
        text += "(no context found)";
    } else {
        for (std::size_t i = 0; i < contexts.size(); ++i) {
            if (i > 0) text += "\n\n";
            text += contexts[i];
        }
    }
    text += "\n\nQuestion: " + trim(question) + "\nAnswer:";
    return {std::move(text), "rag:v1"};
}

// Without stage1_output: the reasoning-elicitation prompt, ending in the
// trigger phrase. With it: the answer-extraction prompt carrying the
// question and the reasoning path verbatim.
inline Prompt build_cot_prompt(const std::string& question,
                               const std::optional<std::string>& stage1_output = std::nullopt) {
    if (!stage1_output) {
        return {"Question: " + trim(question) + "\nAnswer: " + kCotTrigger, "cot-reason:v1"};
    }
    return {"Question: " + trim(question) + "\nAnswer: " + kCotTrigger + "\n" + *stage1_output +
                "\n" + kCotAnswerCue,
            "cot-answer:v1"};
}

struct ResponseRecord {
    int index = 0;
    std::string text;                     // the y_i used downstream, whitespace-trimmed
    std::optional<std::string> reasoning; // CoT stage-1 output
    std::string prompt_fingerprint;
    std::string backend_model;
    bool truncated = false;
    std::string timestamp;
    std::optional<std::uint64_t> sample_seed;
};

struct ResponseSet {
    std::string question_id;
    std::string strategy;
    std::string question;
    int n = 0;
    std::vector<std::string> retrieved_chunk_ids; // Rag only
    std::vector<std::string> retrieved_contexts;  // Rag only, texts for prompt rebuild
    std::vector<ResponseRecord> responses;

    std::vector<std::string> texts() const {
        std::vector<std::string> out;
        out.reserve(responses.size());
        for (const auto& r : responses) out.push_back(r.text);
        return out;
    }
};

inline void to_json(json& j, const ResponseRecord& r) {
    j = json{{"index", r.index},
             {"text", r.text},
             {"prompt_fingerprint", r.prompt_fingerprint},
             {"backend_model", r.backend_model},
             {"truncated", r.truncated},
             {"timestamp", r.timestamp}};
    if (r.reasoning) j["reasoning"] = *r.reasoning;
    if (r.sample_seed) j["sample_seed"] = *r.sample_seed;
}

inline void from_json(const json& j, ResponseRecord& r) {
    j.at("index").get_to(r.index);
    j.at("text").get_to(r.text);
    j.at("prompt_fingerprint").get_to(r.prompt_fingerprint);
    j.at("backend_model").get_to(r.backend_model);
    j.at("truncated").get_to(r.truncated);
    j.at("timestamp").get_to(r.timestamp);
    if (j.contains("reasoning")) r.reasoning = j.at("reasoning").get<std::string>();
    if (j.contains("sample_seed")) r.sample_seed = j.at("sample_seed").get<std::uint64_t>();
}

inline void to_json(json& j, const ResponseSet& s) {
    j = json{{"question_id", s.question_id},
             {"strategy", s.strategy},
             {"question", s.question},
             {"n", s.n},
             {"retrieved_chunk_ids", s.retrieved_chunk_ids},
             {"retrieved_contexts", s.retrieved_contexts},
             {"responses", s.responses}};
}

inline void from_json(const json& j, ResponseSet& s) {
    j.at("question_id").get_to(s.question_id);
    j.at("strategy").get_to(s.strategy);
    j.at("question").get_to(s.question);
    j.at("n").get_to(s.n);
    j.at("retrieved_chunk_ids").get_to(s.retrieved_chunk_ids);
    j.at("retrieved_contexts").get_to(s.retrieved_contexts);
    j.at("responses").get_to(s.responses);
}

// Fingerprint of everything that determined a sample's prompt(s); stage
// prompts are joined with a separator so one-stage and two-stage prompts
// never collide.
inline std::string prompt_fingerprint(const std::vector<std::string>& stage_prompts) {
    std::string joined;
    for (std::size_t i = 0; i < stage_prompts.size(); ++i) {
        if (i > 0) joined.push_back('\x1e');
        joined += stage_prompts[i];
    }
    return fnv1a64_hex(joined);
}

// Rebuilds the prompts a persisted record must have used and returns the
// expected fingerprint; lets audits verify 100% of records.
inline std::string expected_fingerprint(const ResponseSet& set, const ResponseRecord& record) {
    PromptStrategy strategy = PromptStrategy::from_name(set.strategy);
    switch (strategy.kind) {
    case StrategyKind::Plain:
        return prompt_fingerprint({build_plain_prompt(set.question).text});
    case StrategyKind::Rag:
        return prompt_fingerprint({build_rag_prompt(set.question, set.retrieved_contexts).text});
    case StrategyKind::ZeroShotCot: {
        std::string reasoning = record.reasoning.value_or("");
        return prompt_fingerprint(
            {build_cot_prompt(set.question).text, build_cot_prompt(set.question, reasoning).text});
    }
    }
    throw Error("BadStrategy", "unhandled strategy kind");
}

namespace detail {

inline std::optional<std::uint64_t> sample_seed(const GenerationParams& params,
                                                const std::string& question_id,
                                                const std::string& strategy, int index) {
    if (params.seed_policy == SeedPolicy::BackendDefault) return std::nullopt;
    return fnv1a64(question_id + "|" + strategy + "|" + std::to_string(index));
}

inline ChatResult call_with_retries(ChatBackend& backend, const ChatRequest& request,
                                    const GenerationParams& params, TokenBucket* limiter) {
    return with_retries(
        params.max_retries, params.retry_backoff_ms,
        [&] {
            if (limiter) limiter->acquire();
            return backend.complete(request);
        },
        [&](int attempts, const std::string& cause) { throw BackendError(attempts, cause); });
}

} // namespace detail

// Draws the n samples for one (question, strategy) pair. Each sample is
// its own single-completion request (two for ZeroShotCot); samples
// complete in index order. Throws BackendError once retries are
// exhausted — the batch layer records it and moves on.
inline ResponseSet generate_responses(const QuestionRecord& question, const PromptStrategy& strategy,
                                      const GenerationParams& params, ChatBackend& backend,
                                      const RetrievalIndex* index = nullptr,
                                      TokenBucket* limiter = nullptr) {
    params.validate();
    if (strategy.kind == StrategyKind::Rag && index == nullptr) {
        throw ConfigError("rag strategy requires a retrieval index");
    }

    ResponseSet set;
    set.question_id = question.id;
    set.strategy = strategy.name();
    set.question = trim(question.question);
    set.n = params.n;

    std::vector<std::string> contexts;
    if (strategy.kind == StrategyKind::Rag) {
        for (const auto& [chunk, score] : retrieve(*index, set.question, strategy.rag_k)) {
            set.retrieved_chunk_ids.push_back(chunk.chunk_id);
            set.retrieved_contexts.push_back(chunk.text);
        }
        contexts = set.retrieved_contexts;
    }

    for (int i = 0; i < params.n; ++i) {
        ResponseRecord record;
        record.index = i;
        record.sample_seed = detail::sample_seed(params, set.question_id, set.strategy, i);

        ChatRequest request;
        request.model = params.model_name;
        request.temperature = params.temperature;
        request.max_tokens = params.max_tokens;
        request.seed = record.sample_seed;

        std::vector<std::string> stage_prompts;
        ChatResult result;
        switch (strategy.kind) {
        case StrategyKind::Plain: {
            Prompt prompt = build_plain_prompt(set.question);
            stage_prompts.push_back(prompt.text);
            request.messages = {{"user", prompt.text}};
            result = detail::call_with_retries(backend, request, params, limiter);
            break;
        }
        case StrategyKind::Rag: {
            Prompt prompt = build_rag_prompt(set.question, contexts);
            stage_prompts.push_back(prompt.text);
            request.messages = {{"user", prompt.text}};
            result = detail::call_with_retries(backend, request, params, limiter);
            break;
        }
        case StrategyKind::ZeroShotCot: {
            Prompt stage1 = build_cot_prompt(set.question);
            request.messages = {{"user", stage1.text}};
            ChatResult reasoning = detail::call_with_retries(backend, request, params, limiter);
            record.reasoning = trim(reasoning.text);

            Prompt stage2 = build_cot_prompt(set.question, record.reasoning);
            stage_prompts = {stage1.text, stage2.text};
            request.messages = {{"user", stage2.text}};
            result = detail::call_with_retries(backend, request, params, limiter);
            record.truncated = reasoning.truncated; // carries over if stage 1 hit the cap
            break;
        }
        }

        record.text = trim(result.text);
        record.backend_model = result.model;
        record.truncated = record.truncated || result.truncated;
        record.prompt_fingerprint = prompt_fingerprint(stage_prompts);
        record.timestamp = utc_timestamp_iso8601();
        set.responses.push_back(std::move(record));
    }
    return set;
}

struct GenerationFailure {
    std::string question_id;
    std::string strategy;
    std::string error;
    int attempts = 0;
};

inline void to_json(json& j, const GenerationFailure& f) {
    j = json{{"question_id", f.question_id},
             {"strategy", f.strategy},
             {"error", f.error},
             {"attempts", f.attempts}};
}

struct GenerationRun {
    std::string run_id;
    std::uint64_t dataset_seed = 0;
    std::vector<std::string> strategies;
    GenerationParams params;
    std::vector<ResponseSet> sets; // freshly generated plus resumed-from-disk
    std::vector<GenerationFailure> failures;
    int resumed = 0; // pairs skipped because their artifact already existed
};

inline std::filesystem::path response_set_path(const std::filesystem::path& run_dir,
                                               const std::string& strategy,
                                               const std::string& question_id) {
    return run_dir / "responses" / strategy / (question_id + ".json");
}

// Walks every (retained question, strategy) pair, persisting each
// ResponseSet as soon as it completes. Pairs whose artifact already
// exists are loaded, not regenerated, which makes interrupted batches
// resumable; exhausted retries land in the failure log instead of
// aborting the batch.
inline GenerationRun run_generation_batch(const SampledDataset& dataset,
                                          const std::vector<PromptStrategy>& strategies,
                                          const GenerationParams& params, ChatBackend& backend,
                                          const std::filesystem::path& run_dir,
                                          const RetrievalIndex* index = nullptr,
                                          int parallelism = 4, TokenBucket* limiter = nullptr) {
    params.validate();

    struct Task {
        const QuestionRecord* question;
        const PromptStrategy* strategy;
    };
    std::vector<Task> tasks;
    for (const auto& strategy : strategies) {
        for (const auto& [category, records] : dataset.categories) {
            for (const auto& record : records) tasks.push_back({&record, &strategy});
        }
    }

    GenerationRun run;
    run.run_id = run_dir.filename().string();
    run.dataset_seed = dataset.seed;
    run.params = params;
    for (const auto& s : strategies) run.strategies.push_back(s.name());

    std::mutex sink_mutex;
    const std::filesystem::path failure_log = run_dir / "generation_failures.jsonl";

    run_parallel(tasks.size(), parallelism, [&](std::size_t t) {
        const Task& task = tasks[t];
        const auto path = response_set_path(run_dir, task.strategy->name(), task.question->id);
        try {
            if (std::filesystem::exists(path)) {
                ResponseSet existing = read_json_file(path).get<ResponseSet>();
                std::scoped_lock lock(sink_mutex);
                run.sets.push_back(std::move(existing));
                ++run.resumed;
                return;
            }
            ResponseSet fresh =
                generate_responses(*task.question, *task.strategy, params, backend, index, limiter);
            write_json_file_atomic(path, json(fresh));
            std::scoped_lock lock(sink_mutex);
            run.sets.push_back(std::move(fresh));
        } catch (const Error& e) {
            GenerationFailure failure{task.question->id, task.strategy->name(), e.what(), 0};
            if (const auto* backend_error = dynamic_cast<const BackendError*>(&e)) {
                failure.attempts = backend_error->attempts();
            }
            std::scoped_lock lock(sink_mutex);
            append_jsonl_line(failure_log, json(failure));
            run.failures.push_back(std::move(failure));
        }
    });
    return run;
}

} // namespace semcons
