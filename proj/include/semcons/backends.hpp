#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semcons/equivalence.hpp"
#include "semcons/errors.hpp"
#include "semcons/http.hpp"
#include "semcons/json_io.hpp"
#include "semcons/text.hpp"

namespace semcons {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 1.0;
    int max_tokens = 256;
    std::optional<std::uint64_t> seed;
};

struct ChatResult {
    std::string text;
    std::string model;
    bool truncated = false; // finish_reason == "length"
};

// Single-completion chat backend. Implementations throw on failure; the
// generation layer owns retries and failure recording.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string name() const = 0;
    virtual ChatResult complete(const ChatRequest& request) = 0;
};

// OpenAI-compatible chat-completions client: POST {model, messages,
// temperature, max_tokens} to base_url + path, bearer auth from an
// environment variable.
class OpenAiChatBackend final : public ChatBackend {
public:
    struct Options {
        std::string base_url;
        std::string path = "/v1/chat/completions";
        std::string api_key_env = "SEMCONS_LLM_API_KEY";
        int timeout_s = 30;
    };

    explicit OpenAiChatBackend(Options options) : options_(std::move(options)) {
        if (options_.base_url.empty()) {
            throw ConfigError("openai backend requires a base_url");
        }
    }

    std::string name() const override { return "openai:" + options_.base_url; }

    ChatResult complete(const ChatRequest& request) override {
        json body{{"model", request.model},
                  {"temperature", request.temperature},
                  {"max_tokens", request.max_tokens}};
        body["messages"] = json::array();
        for (const auto& m : request.messages) {
            body["messages"].push_back({{"role", m.role}, {"content", m.content}});
        }
        if (request.seed) body["seed"] = *request.seed;

        httplib::Client client(options_.base_url);
        client.set_connection_timeout(options_.timeout_s, 0);
        client.set_read_timeout(options_.timeout_s, 0);
        httplib::Headers headers;
        if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        auto res = client.Post(options_.path, headers, body.dump(), "application/json");
        if (!res) {
            throw Error("HttpTransport",
                        "chat request failed: " + httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
            throw Error("HttpStatus", "chat request returned status " +
                                          std::to_string(res->status) + ": " + res->body);
        }

        json reply = json::parse(res->body);
        const auto& choices = reply.at("choices");
        if (!choices.is_array() || choices.empty()) {
            throw Error("BadResponse", "chat response has no choices");
        }
        ChatResult out;
        out.text = choices[0].at("message").at("content").get<std::string>();
        out.model = reply.value("model", request.model);
        out.truncated = choices[0].value("finish_reason", "stop") == "length";
        return out;
    }

private:
    Options options_;
};

// Deterministic in-process backend for offline runs and fixtures: the
// reply is drawn from a small answer pool keyed by a hash of the prompt
// and sample seed, so identical runs produce identical transcripts.
class PoolMockBackend final : public ChatBackend {
public:
    explicit PoolMockBackend(int pool_size = 4, std::string model = "mock-pool")
        : pool_size_(std::max(pool_size, 1)), model_(std::move(model)) {}

    std::string name() const override { return "mock:" + model_; }

    ChatResult complete(const ChatRequest& request) override {
        calls_.fetch_add(1);
        std::string prompt = request.messages.empty() ? "" : request.messages.back().content;
        std::uint64_t h = fnv1a64(prompt);
        if (request.seed) h = h * 0x9e3779b97f4a7c15ull + *request.seed;
        // fnv's low bits diffuse poorly for short suffix changes; finalize
        // before reducing to the pool size
        h ^= h >> 30;
        h *= 0xbf58476d1ce4e5b9ull;
        h ^= h >> 27;
        h *= 0x94d049bb133111ebull;
        h ^= h >> 31;
        std::uint64_t pick = h % static_cast<std::uint64_t>(pool_size_);
        return {"answer-" + std::to_string(pick), model_, false};
    }

    int calls() const { return calls_.load(); }

private:
    int pool_size_;
    std::string model_;
    std::atomic<int> calls_{0};
};

// Wraps any backend and counts completions; used to verify resume logic
// issues no redundant calls.
class CountingBackend final : public ChatBackend {
public:
    explicit CountingBackend(ChatBackend& inner) : inner_(inner) {}
    std::string name() const override { return inner_.name(); }
    ChatResult complete(const ChatRequest& request) override {
        calls_.fetch_add(1);
        return inner_.complete(request);
    }
    int calls() const { return calls_.load(); }

private:
    ChatBackend& inner_;
    std::atomic<int> calls_{0};
};

// --- NLI judge over HTTP -----------------------------------------------------

// Remote NLI judge: POST {premise, hypothesis}, response {label, scores}.
// The premise/hypothesis concatenation is question + " " + answer, built
// once per direction. The judge id embeds the model name the service
// reports (resolved by a one-time probe) so cached verdicts from
// different models never mix.
class HttpNliJudge final : public EquivalenceJudge {
public:
    struct Options {
        std::string base_url;
        std::string path = "/nli";
        std::string api_key_env = "SEMCONS_NLI_API_KEY";
        int timeout_s = 15;
        int max_retries = 3;
        int retry_backoff_ms = 250;
        std::string model_hint; // used if the service never reports a model
    };

    explicit HttpNliJudge(Options options) : options_(std::move(options)) {
        if (options_.base_url.empty()) {
            throw ConfigError("nli judge requires a base_url");
        }
    }

    std::string id() const override {
        resolve_model();
        return "nli-bidir:" + model_ + ":qa-space:v1";
    }

    bool lexical() const override { return false; }

    JudgeLabel assess(const std::string& question, const std::string& answer_a,
                      const std::string& answer_b) override {
        resolve_model();
        std::string premise = question + " " + answer_a;
        std::string hypothesis = question + " " + answer_b;
        json reply = post_with_retries(premise, hypothesis);
        return judge_label_from_name(reply.at("label").get<std::string>());
    }

private:
    json post_with_retries(const std::string& premise, const std::string& hypothesis) const {
        return with_retries(
            options_.max_retries, options_.retry_backoff_ms,
            [&] { return post_once(premise, hypothesis); },
            [&](int attempts, const std::string& cause) {
                throw JudgeUnavailableError("nli judge at " + options_.base_url + " failed after " +
                                            std::to_string(attempts) + " attempt(s): " + cause);
            });
    }

    json post_once(const std::string& premise, const std::string& hypothesis) const {
        httplib::Client client(options_.base_url);
        client.set_connection_timeout(options_.timeout_s, 0);
        client.set_read_timeout(options_.timeout_s, 0);
        httplib::Headers headers;
        if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        json body{{"premise", premise}, {"hypothesis", hypothesis}};
        auto res = client.Post(options_.path, headers, body.dump(), "application/json");
        if (!res) {
            throw Error("HttpTransport", "nli request failed: " + httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
            throw Error("HttpStatus",
                        "nli request returned status " + std::to_string(res->status));
        }
        return json::parse(res->body);
    }

    void resolve_model() const {
        std::scoped_lock lock(model_mutex_);
        if (!model_.empty()) return;
        json reply = post_with_retries("probe", "probe");
        model_ = reply.value("model", "");
        if (model_.empty()) {
            model_ = options_.model_hint.empty() ? "unknown-model" : options_.model_hint;
        }
    }

    Options options_;
    mutable std::mutex model_mutex_;
    mutable std::string model_;
};

// Deterministic stand-in for the NLI judge in offline runs: entailment
// iff the two answers normalize to the same string, neutral otherwise.
class MockNliJudge final : public EquivalenceJudge {
public:
    std::string id() const override { return "nli-mock-equality:v1"; }
    bool lexical() const override { return false; }
    JudgeLabel assess(const std::string&, const std::string& answer_a,
                      const std::string& answer_b) override {
        return normalize_answer(answer_a) == normalize_answer(answer_b) ? JudgeLabel::Entailment
                                                                        : JudgeLabel::Neutral;
    }
};

} // namespace semcons
