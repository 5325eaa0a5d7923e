#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>

#include "semcons/errors.hpp"
#include "semcons/retrieval.hpp"

namespace semcons {

// Splits an absolute URL into the part httplib::Client wants
// (scheme://host[:port]) and the request path.
struct SplitUrl {
    std::string base;
    std::string path;
};

inline SplitUrl split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("BadUrl", "not an absolute URL: " + url);
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// cpp-httplib backed fetcher used for corpus crawling. Redirects are
// followed (bounded by CPPHTTPLIB_REDIRECT_MAX_COUNT, pinned to 5 in the
// build); failures surface as FetchedResource.error, never as exceptions.
class HttplibFetcher final : public UrlFetcher {
public:
    explicit HttplibFetcher(FetchPolicy policy = {}) : policy_(std::move(policy)) {}

    FetchedResource get(const std::string& url) override {
        FetchedResource out;
        SplitUrl split;
        try {
            split = split_url(url);
        } catch (const Error& e) {
            out.error = e.what();
            return out;
        }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (url.rfind("https://", 0) == 0) {
            out.error = "https not supported in this build";
            return out;
        }
#endif
        httplib::Client client(split.base);
        client.set_connection_timeout(policy_.timeout_s, 0);
        client.set_read_timeout(policy_.timeout_s, 0);
        client.set_follow_location(true);
        client.set_default_headers({{"User-Agent", policy_.user_agent}});
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        client.enable_server_certificate_verification(true);
#endif
        auto res = client.Get(split.path);
        if (!res) {
            out.error = "transport error: " + httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.content_type = res->get_header_value("Content-Type");
        out.body = res->body;
        return out;
    }

private:
    FetchPolicy policy_;
};

// Runs fn, retrying on any exception with exponential backoff. After
// max_retries additional attempts the final cause is reported through
// make_error (so callers choose BackendError vs JudgeUnavailable).
template <typename F>
auto with_retries(int max_retries, int backoff_ms, F&& fn,
                  const std::function<void(int attempts, const std::string& cause)>& on_exhausted) {
    int attempt = 0;
    for (;;) {
        try {
            return fn();
        } catch (const std::exception& e) {
            ++attempt;
            if (attempt > max_retries) {
                on_exhausted(attempt, e.what());
                throw; // unreachable when on_exhausted throws; keeps the compiler honest
            }
            auto delay = std::chrono::milliseconds(
                static_cast<long long>(backoff_ms) * (1ll << std::min(attempt - 1, 16)));
            std::this_thread::sleep_for(delay);
        }
    }
}

// Token bucket shared by all requests to one backend. rate <= 0 disables
// limiting. capacity bounds bursts after idle periods.
class TokenBucket {
public:
    TokenBucket(double tokens_per_second, double capacity)
        : rate_(tokens_per_second), capacity_(std::max(capacity, 1.0)), tokens_(capacity_) {}

    void acquire() {
        if (rate_ <= 0.0) return;
        std::unique_lock lock(mutex_);
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            double deficit = 1.0 - tokens_;
            auto wait = std::chrono::duration<double>(deficit / rate_);
            cv_.wait_for(lock, wait);
        }
    }

private:
    void refill() {
        auto now = std::chrono::steady_clock::now();
        std::chrono::duration<double> elapsed = now - last_;
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_);
    }

    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
    std::mutex mutex_;
    std::condition_variable cv_;
};

// Fixed-size worker pool over an indexed task list. Tasks must do their
// own error handling; an escaped exception aborts the process by design
// of std::thread, so don't let one escape.
inline void run_parallel(std::size_t task_count, int parallelism,
                         const std::function<void(std::size_t)>& task) {
    if (task_count == 0) return;
    std::size_t workers = std::min<std::size_t>(std::max(parallelism, 1), task_count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < task_count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= task_count) return;
                task(i);
            }
        });
    }
    for (auto& t : threads) t.join();
}

} // namespace semcons
