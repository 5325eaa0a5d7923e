#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semcons/backends.hpp"
#include "semcons/errors.hpp"
#include "semcons/generation.hpp"
#include "semcons/json_io.hpp"
#include "semcons/retrieval.hpp"

namespace semcons {

struct DatasetConfig {
    std::string path;
    int per_category = 5;
    int min_category_size = 5;
    std::uint64_t seed = 42;
};

struct RetrievalConfig {
    int k = 3;           // chunks provided as context
    int chunk_size = 256; // whitespace tokens
    int overlap = 32;
    double k1 = 1.2;
    double b = 0.75;
    bool offline = false;
    std::string corpus_dir; // when set, the corpus is read from disk, no network
    FetchPolicy fetch;
};

struct BackendConfig {
    std::string type = "mock"; // "openai" | "mock"
    std::string base_url;
    std::string chat_path = "/v1/chat/completions";
    std::string model = "default";
    std::string api_key_env = "SEMCONS_LLM_API_KEY";
    int timeout_s = 30;
    int mock_pool_size = 4;
};

struct JudgeConfig {
    std::string type = "mock"; // "nli" | "exact" | "normalized" | "mock"
    std::string base_url;
    std::string path = "/nli";
    std::string api_key_env = "SEMCONS_NLI_API_KEY";
    int timeout_s = 15;
    int max_retries = 3;
    int retry_backoff_ms = 250;
    std::string model_hint;
};

struct GenerationConfig {
    int n = 5;
    double temperature = 1.0;
    int max_tokens = 256;
    int parallelism = 4;
    int max_retries = 3;
    int retry_backoff_ms = 250;
    double requests_per_second = 0.0; // <= 0 disables rate limiting
    std::string seed_policy = "backend_default"; // or "per_sample"
};

struct RunConfig {
    std::string run_dir;
    DatasetConfig dataset;
    std::vector<std::string> strategies{"plain", "rag", "cot"};
    GenerationConfig generation;
    BackendConfig backend;
    RetrievalConfig retrieval;
    JudgeConfig judge;

    void validate() const;
    GenerationParams generation_params() const;

    static RunConfig from_json(const json& j);
    static RunConfig load(const std::filesystem::path& path);
    json to_json_value() const;
};

inline void RunConfig::validate() const {
    if (run_dir.empty()) throw ConfigError("run_dir must be set");
    if (dataset.path.empty()) throw ConfigError("dataset.path must be set");
    if (dataset.per_category < 1) throw ConfigError("dataset.per_category must be >= 1");
    if (dataset.min_category_size < dataset.per_category) {
        throw ConfigError("dataset.min_category_size must be >= per_category");
    }
    if (strategies.empty()) throw ConfigError("at least one strategy required");
    for (const auto& s : strategies) {
        if (s != "plain" && s != "rag" && s != "cot") {
            throw ConfigError("unknown strategy '" + s + "' (expected plain, rag, or cot)");
        }
    }
    if (generation.n < 2) throw ConfigError("generation.n must be >= 2");
    if (generation.temperature < 0.0) throw ConfigError("generation.temperature must be >= 0");
    if (generation.max_tokens < 1) throw ConfigError("generation.max_tokens must be >= 1");
    if (generation.parallelism < 1) throw ConfigError("generation.parallelism must be >= 1");
    if (retrieval.k < 1) throw ConfigError("retrieval.k must be >= 1");
    if (retrieval.chunk_size < 1) throw ConfigError("retrieval.chunk_size must be >= 1");
    if (retrieval.overlap < 0 || retrieval.overlap >= retrieval.chunk_size) {
        throw ConfigError("retrieval.overlap must satisfy 0 <= overlap < chunk_size");
    }
    if (retrieval.b < 0.0 || retrieval.b > 1.0) throw ConfigError("retrieval.b must be in [0, 1]");
    if (retrieval.k1 < 0.0) throw ConfigError("retrieval.k1 must be >= 0");
    if (backend.type != "openai" && backend.type != "mock") {
        throw ConfigError("backend.type must be 'openai' or 'mock'");
    }
    if (backend.type == "openai" && backend.base_url.empty()) {
        throw ConfigError("backend.base_url required for the openai backend");
    }
    if (judge.type != "nli" && judge.type != "exact" && judge.type != "normalized" &&
        judge.type != "mock") {
        throw ConfigError("judge.type must be one of nli, exact, normalized, mock");
    }
    if (judge.type == "nli" && judge.base_url.empty()) {
        throw ConfigError("judge.base_url required for the nli judge");
    }
    if (generation.seed_policy != "backend_default" && generation.seed_policy != "per_sample") {
        throw ConfigError("generation.seed_policy must be 'backend_default' or 'per_sample'");
    }
}

inline GenerationParams RunConfig::generation_params() const {
    GenerationParams params;
    params.temperature = generation.temperature;
    params.max_tokens = generation.max_tokens;
    params.n = generation.n;
    params.model_name = backend.model;
    params.seed_policy = generation.seed_policy == "per_sample" ? SeedPolicy::PerSample
                                                                : SeedPolicy::BackendDefault;
    params.max_retries = generation.max_retries;
    params.retry_backoff_ms = generation.retry_backoff_ms;
    return params;
}

inline RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    cfg.run_dir = j.value("run_dir", cfg.run_dir);
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        cfg.dataset.path = d.value("path", cfg.dataset.path);
        cfg.dataset.per_category = d.value("per_category", cfg.dataset.per_category);
        cfg.dataset.min_category_size = d.value("min_category_size", cfg.dataset.min_category_size);
        cfg.dataset.seed = d.value("seed", cfg.dataset.seed);
    }
    cfg.strategies = j.value("strategies", cfg.strategies);
    if (j.contains("generation")) {
        const auto& g = j.at("generation");
        cfg.generation.n = g.value("n", cfg.generation.n);
        cfg.generation.temperature = g.value("temperature", cfg.generation.temperature);
        cfg.generation.max_tokens = g.value("max_tokens", cfg.generation.max_tokens);
        cfg.generation.parallelism = g.value("parallelism", cfg.generation.parallelism);
        cfg.generation.max_retries = g.value("max_retries", cfg.generation.max_retries);
        cfg.generation.retry_backoff_ms = g.value("retry_backoff_ms", cfg.generation.retry_backoff_ms);
        cfg.generation.requests_per_second =
            g.value("requests_per_second", cfg.generation.requests_per_second);
        cfg.generation.seed_policy = g.value("seed_policy", cfg.generation.seed_policy);
    }
    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        cfg.backend.type = b.value("type", cfg.backend.type);
        cfg.backend.base_url = b.value("base_url", cfg.backend.base_url);
        cfg.backend.chat_path = b.value("chat_path", cfg.backend.chat_path);
        cfg.backend.model = b.value("model", cfg.backend.model);
        cfg.backend.api_key_env = b.value("api_key_env", cfg.backend.api_key_env);
        cfg.backend.timeout_s = b.value("timeout_s", cfg.backend.timeout_s);
        cfg.backend.mock_pool_size = b.value("mock_pool_size", cfg.backend.mock_pool_size);
    }
    if (j.contains("retrieval")) {
        const auto& r = j.at("retrieval");
        cfg.retrieval.k = r.value("k", cfg.retrieval.k);
        cfg.retrieval.chunk_size = r.value("chunk_size", cfg.retrieval.chunk_size);
        cfg.retrieval.overlap = r.value("overlap", cfg.retrieval.overlap);
        cfg.retrieval.k1 = r.value("k1", cfg.retrieval.k1);
        cfg.retrieval.b = r.value("b", cfg.retrieval.b);
        cfg.retrieval.offline = r.value("offline", cfg.retrieval.offline);
        cfg.retrieval.corpus_dir = r.value("corpus_dir", cfg.retrieval.corpus_dir);
        cfg.retrieval.fetch.timeout_s = r.value("fetch_timeout_s", cfg.retrieval.fetch.timeout_s);
        cfg.retrieval.fetch.parallelism =
            r.value("fetch_parallelism", cfg.retrieval.fetch.parallelism);
        cfg.retrieval.fetch.user_agent = r.value("user_agent", cfg.retrieval.fetch.user_agent);
    }
    if (j.contains("judge")) {
        const auto& jd = j.at("judge");
        cfg.judge.type = jd.value("type", cfg.judge.type);
        cfg.judge.base_url = jd.value("base_url", cfg.judge.base_url);
        cfg.judge.path = jd.value("path", cfg.judge.path);
        cfg.judge.api_key_env = jd.value("api_key_env", cfg.judge.api_key_env);
        cfg.judge.timeout_s = jd.value("timeout_s", cfg.judge.timeout_s);
        cfg.judge.max_retries = jd.value("max_retries", cfg.judge.max_retries);
        cfg.judge.retry_backoff_ms = jd.value("retry_backoff_ms", cfg.judge.retry_backoff_ms);
        cfg.judge.model_hint = jd.value("model_hint", cfg.judge.model_hint);
    }
    cfg.validate();
    return cfg;
}

inline RunConfig RunConfig::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    try {
        return from_json(json::parse(read_text_file(path)));
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
}

inline json RunConfig::to_json_value() const {
    return json{
        {"run_dir", run_dir},
        {"dataset",
         {{"path", dataset.path},
          {"per_category", dataset.per_category},
          {"min_category_size", dataset.min_category_size},
          {"seed", dataset.seed}}},
        {"strategies", strategies},
        {"generation",
         {{"n", generation.n},
          {"temperature", generation.temperature},
          {"max_tokens", generation.max_tokens},
          {"parallelism", generation.parallelism},
          {"max_retries", generation.max_retries},
          {"retry_backoff_ms", generation.retry_backoff_ms},
          {"requests_per_second", generation.requests_per_second},
          {"seed_policy", generation.seed_policy}}},
        {"backend",
         {{"type", backend.type},
          {"base_url", backend.base_url},
          {"chat_path", backend.chat_path},
          {"model", backend.model},
          {"api_key_env", backend.api_key_env},
          {"timeout_s", backend.timeout_s},
          {"mock_pool_size", backend.mock_pool_size}}},
        {"retrieval",
         {{"k", retrieval.k},
          {"chunk_size", retrieval.chunk_size},
          {"overlap", retrieval.overlap},
          {"k1", retrieval.k1},
          {"b", retrieval.b},
          {"offline", retrieval.offline},
          {"corpus_dir", retrieval.corpus_dir},
          {"fetch_timeout_s", retrieval.fetch.timeout_s},
          {"fetch_parallelism", retrieval.fetch.parallelism},
          {"user_agent", retrieval.fetch.user_agent}}},
        {"judge",
         {{"type", judge.type},
          {"base_url", judge.base_url},
          {"path", judge.path},
          {"api_key_env", judge.api_key_env},
          {"timeout_s", judge.timeout_s},
          {"max_retries", judge.max_retries},
          {"retry_backoff_ms", judge.retry_backoff_ms},
          {"model_hint", judge.model_hint}}}};
}

// Secrets stay in the environment; the config only names the variables.
inline std::unique_ptr<ChatBackend> make_chat_backend(const RunConfig& cfg) {
    if (cfg.backend.type == "openai") {
        OpenAiChatBackend::Options options;
        options.base_url = cfg.backend.base_url;
        options.path = cfg.backend.chat_path;
        options.api_key_env = cfg.backend.api_key_env;
        options.timeout_s = cfg.backend.timeout_s;
        return std::make_unique<OpenAiChatBackend>(std::move(options));
    }
    if (cfg.backend.type == "mock") {
        return std::make_unique<PoolMockBackend>(cfg.backend.mock_pool_size, cfg.backend.model);
    }
    throw ConfigError("unknown backend type: " + cfg.backend.type);
}

inline std::unique_ptr<EquivalenceJudge> make_judge(const RunConfig& cfg) {
    if (cfg.judge.type == "nli") {
        HttpNliJudge::Options options;
        options.base_url = cfg.judge.base_url;
        options.path = cfg.judge.path;
        options.api_key_env = cfg.judge.api_key_env;
        options.timeout_s = cfg.judge.timeout_s;
        options.max_retries = cfg.judge.max_retries;
        options.retry_backoff_ms = cfg.judge.retry_backoff_ms;
        options.model_hint = cfg.judge.model_hint;
        return std::make_unique<HttpNliJudge>(std::move(options));
    }
    if (cfg.judge.type == "exact") return std::make_unique<ExactMatchJudge>();
    if (cfg.judge.type == "normalized") return std::make_unique<NormalizedMatchJudge>();
    if (cfg.judge.type == "mock") return std::make_unique<MockNliJudge>();
    throw ConfigError("unknown judge type: " + cfg.judge.type);
}

} // namespace semcons
