#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "semcons/errors.hpp"
#include "semcons/json_io.hpp"
#include "semcons/text.hpp"

namespace semcons {

struct CorpusDocument {
    std::string doc_id;
    std::string source; // URL or filesystem path
    std::string text;   // non-empty, whitespace-normalized visible text
};

struct CorpusFailure {
    std::string source;
    std::string reason;
};

struct Corpus {
    std::vector<CorpusDocument> documents;
    std::string fetched_at;
    std::vector<CorpusFailure> failures;
};

struct FetchedResource {
    int status = 0;
    std::string content_type;
    std::string body;
    std::string error; // transport-level failure, empty on success
};

// Transport abstraction so corpus building can be tested without sockets.
class UrlFetcher {
public:
    virtual ~UrlFetcher() = default;
    virtual FetchedResource get(const std::string& url) = 0;
};

struct FetchPolicy {
    int timeout_s = 15;
    int parallelism = 4;
    std::string user_agent = "semcons-crawler/0.1";
    bool offline = false;
};

inline void to_json(json& j, const CorpusDocument& d) {
    j = json{{"doc_id", d.doc_id}, {"source", d.source}, {"text", d.text}};
}

inline void from_json(const json& j, CorpusDocument& d) {
    j.at("doc_id").get_to(d.doc_id);
    j.at("source").get_to(d.source);
    j.at("text").get_to(d.text);
}

namespace detail {

inline bool is_url(const std::string& source) {
    return source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0;
}

inline std::string doc_id_base(const std::string& source) {
    std::string base;
    if (is_url(source)) {
        std::size_t scheme = source.find("://");
        base = slugify(source.substr(scheme + 3));
    } else {
        base = slugify(std::filesystem::path(source).filename().string());
    }
    if (base.size() > 80) base.resize(80);
    return base.empty() ? "doc" : base;
}

struct SourceResult {
    bool ok = false;
    std::string text;
    std::string reason;
};

inline SourceResult extract_local(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return {false, "", "file not found"};
    std::string body;
    try {
        body = read_text_file(path);
    } catch (const Error& e) {
        return {false, "", e.what()};
    }
    std::string ext = to_lower(std::filesystem::path(path).extension().string());
    std::string text = (ext == ".html" || ext == ".htm" || looks_like_html("", body))
                           ? html_to_text(body)
                           : collapse_whitespace(body);
    if (text.empty()) return {false, "", "empty after extraction"};
    return {true, std::move(text), ""};
}

inline SourceResult extract_fetched(const FetchedResource& res) {
    if (!res.error.empty()) return {false, "", res.error};
    if (res.status < 200 || res.status >= 300) {
        return {false, "", "http status " + std::to_string(res.status)};
    }
    std::string ct = to_lower(res.content_type);
    bool is_html = looks_like_html(res.content_type, res.body);
    bool is_text = ct.empty() || ct.find("text/") != std::string::npos ||
                   ct.find("json") != std::string::npos || is_html;
    if (!is_text) return {false, "", "non-text content-type: " + res.content_type};
    std::string text = is_html ? html_to_text(res.body) : collapse_whitespace(res.body);
    if (text.empty()) return {false, "", "empty after extraction"};
    return {true, std::move(text), ""};
}

} // namespace detail

// Builds a document corpus from a mixed list of URLs, files, and
// directories (a directory expands to its regular files in sorted order).
// Sources are deduplicated; individual failures are recorded, never fatal,
// unless nothing at all could be extracted.
inline Corpus build_corpus(const std::vector<std::string>& sources, const FetchPolicy& policy = {},
                           UrlFetcher* fetcher = nullptr) {
    if (sources.empty()) throw AllSourcesFailedError("no sources given");

    std::vector<std::string> expanded;
    std::unordered_set<std::string> seen;
    for (const auto& source : sources) {
        std::error_code ec;
        if (!detail::is_url(source) && std::filesystem::is_directory(source, ec)) {
            std::vector<std::string> files;
            for (const auto& entry : std::filesystem::directory_iterator(source)) {
                if (entry.is_regular_file()) files.push_back(entry.path().string());
            }
            std::sort(files.begin(), files.end());
            for (auto& f : files) {
                if (seen.insert(f).second) expanded.push_back(std::move(f));
            }
        } else if (seen.insert(source).second) {
            expanded.push_back(source);
        }
    }

    std::vector<detail::SourceResult> results(expanded.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= expanded.size()) return;
            const std::string& source = expanded[i];
            if (!detail::is_url(source)) {
                results[i] = detail::extract_local(source);
            } else if (policy.offline || fetcher == nullptr) {
                results[i] = {false, "", "network access disabled"};
            } else {
                results[i] = detail::extract_fetched(fetcher->get(source));
            }
        }
    };
    std::size_t thread_count =
        std::min<std::size_t>(std::max(policy.parallelism, 1), std::max<std::size_t>(expanded.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();

    Corpus corpus;
    corpus.fetched_at = utc_timestamp_iso8601();
    std::unordered_map<std::string, int> id_uses;
    for (std::size_t i = 0; i < expanded.size(); ++i) {
        if (!results[i].ok) {
            corpus.failures.push_back({expanded[i], results[i].reason});
            continue;
        }
        std::string doc_id = detail::doc_id_base(expanded[i]);
        int uses = ++id_uses[doc_id];
        if (uses > 1) doc_id += "-" + std::to_string(uses);
        corpus.documents.push_back({std::move(doc_id), expanded[i], std::move(results[i].text)});
    }
    if (corpus.documents.empty()) {
        throw AllSourcesFailedError("all " + std::to_string(expanded.size()) + " sources failed");
    }
    return corpus;
}

struct Chunk {
    std::string chunk_id; // "<doc_id>#<ordinal>"
    std::string doc_id;
    std::string text;
    int token_count = 0;
};

inline void to_json(json& j, const Chunk& c) {
    j = json{{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id}, {"text", c.text},
             {"token_count", c.token_count}};
}

inline void from_json(const json& j, Chunk& c) {
    j.at("chunk_id").get_to(c.chunk_id);
    j.at("doc_id").get_to(c.doc_id);
    j.at("text").get_to(c.text);
    j.at("token_count").get_to(c.token_count);
}

// Sliding whitespace-token windows of at most chunk_size_limit tokens,
// consecutive windows sharing `overlap` tokens. Concatenating a document's
// chunks minus the overlaps reproduces its normalized token stream.
inline std::vector<Chunk> chunk_documents(const Corpus& corpus, int chunk_size_limit, int overlap) {
    if (chunk_size_limit < 1) throw std::invalid_argument("chunk_size_limit must be >= 1");
    if (overlap < 0 || overlap >= chunk_size_limit) {
        throw std::invalid_argument("overlap must satisfy 0 <= overlap < chunk_size_limit");
    }
    const std::size_t limit = static_cast<std::size_t>(chunk_size_limit);
    const std::size_t stride = limit - static_cast<std::size_t>(overlap);

    std::vector<Chunk> chunks;
    for (const auto& doc : corpus.documents) {
        auto tokens = split_whitespace(doc.text);
        if (tokens.empty()) continue;
        int ordinal = 0;
        std::size_t start = 0;
        for (;;) {
            std::size_t end = std::min(start + limit, tokens.size());
            std::string text;
            for (std::size_t t = start; t < end; ++t) {
                if (t > start) text.push_back(' ');
                text += tokens[t];
            }
            chunks.push_back({doc.doc_id + "#" + std::to_string(ordinal), doc.doc_id,
                              std::move(text), static_cast<int>(end - start)});
            ++ordinal;
            if (end == tokens.size()) break;
            start += stride;
        }
    }
    return chunks;
}

// Immutable BM25 index over chunks. Tokenization is lowercased
// whitespace-and-punctuation splitting; idf uses the non-negative
// log(1 + (N - df + 0.5)/(df + 0.5)) form so matching any query term
// always yields a positive score.
class RetrievalIndex {
public:
    double k1() const { return k1_; }
    double b() const { return b_; }
    double average_chunk_length() const { return avg_length_; }
    const std::vector<Chunk>& chunks() const { return chunks_; }

    int document_frequency(const std::string& term) const {
        auto it = term_ids_.find(term);
        return it == term_ids_.end() ? 0 : doc_freq_[it->second];
    }

    friend RetrievalIndex index_corpus(std::vector<Chunk> chunks, double k1, double b);
    friend std::vector<std::pair<Chunk, double>> retrieve(const RetrievalIndex& index,
                                                          const std::string& query, int k);

private:
    double term_score(int df, int tf, int length) const {
        double n = static_cast<double>(chunks_.size());
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        double norm = 1.0 - b_ + b_ * (avg_length_ > 0.0 ? length / avg_length_ : 0.0);
        return idf * (tf * (k1_ + 1.0)) / (tf + k1_ * norm);
    }

    std::vector<Chunk> chunks_;
    std::vector<int> lengths_; // BM25 token count per chunk
    double k1_ = 1.2;
    double b_ = 0.75;
    double avg_length_ = 0.0;
    std::unordered_map<std::string, std::size_t> term_ids_;
    std::vector<int> doc_freq_;
    std::vector<std::vector<std::pair<std::size_t, int>>> postings_; // term -> (chunk, tf)
};

inline RetrievalIndex index_corpus(std::vector<Chunk> chunks, double k1 = 1.2, double b = 0.75) {
    if (chunks.empty()) throw EmptyCorpusError("cannot index an empty chunk list");
    if (k1 < 0.0) throw std::invalid_argument("k1 must be >= 0");
    if (b < 0.0 || b > 1.0) throw std::invalid_argument("b must be in [0, 1]");

    RetrievalIndex index;
    index.k1_ = k1;
    index.b_ = b;
    index.chunks_ = std::move(chunks);
    index.lengths_.reserve(index.chunks_.size());

    long long total_tokens = 0;
    for (std::size_t c = 0; c < index.chunks_.size(); ++c) {
        auto tokens = word_tokens(index.chunks_[c].text);
        index.lengths_.push_back(static_cast<int>(tokens.size()));
        total_tokens += static_cast<long long>(tokens.size());

        std::map<std::string, int> counts;
        for (auto& t : tokens) ++counts[t];
        for (auto& [term, tf] : counts) {
            auto [it, inserted] = index.term_ids_.emplace(term, index.postings_.size());
            if (inserted) {
                index.postings_.emplace_back();
                index.doc_freq_.push_back(0);
            }
            index.postings_[it->second].emplace_back(c, tf);
            ++index.doc_freq_[it->second];
        }
    }
    index.avg_length_ =
        static_cast<double>(total_tokens) / static_cast<double>(index.chunks_.size());
    return index;
}

// Top-k chunks by BM25 score, descending; ties break on chunk_id so the
// ranking is a pure function of (index, query, k). Zero-score chunks are
// never returned, so an unmatched query yields an empty list.
inline std::vector<std::pair<Chunk, double>> retrieve(const RetrievalIndex& index,
                                                      const std::string& query, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    std::vector<std::string> unique_terms;
    {
        std::unordered_set<std::string> seen;
        for (auto& t : word_tokens(query)) {
            if (seen.insert(t).second) unique_terms.push_back(std::move(t));
        }
    }

    std::unordered_map<std::size_t, double> scores;
    for (const auto& term : unique_terms) {
        auto it = index.term_ids_.find(term);
        if (it == index.term_ids_.end()) continue;
        for (const auto& [chunk, tf] : index.postings_[it->second]) {
            scores[chunk] += index.term_score(index.doc_freq_[it->second], tf, index.lengths_[chunk]);
        }
    }

    std::vector<std::pair<Chunk, double>> ranked;
    ranked.reserve(scores.size());
    for (const auto& [chunk, score] : scores) {
        if (score > 0.0) ranked.emplace_back(index.chunks_[chunk], score);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& lhs, const auto& rhs) {
        if (lhs.second != rhs.second) return lhs.second > rhs.second;
        return lhs.first.chunk_id < rhs.first.chunk_id;
    });
    if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
    return ranked;
}

inline void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    std::string out;
    for (const auto& doc : corpus.documents) {
        out += json(doc).dump();
        out.push_back('\n');
    }
    write_text_file_atomic(path, out);
}

inline Corpus load_corpus_jsonl(const std::filesystem::path& path) {
    Corpus corpus;
    for (const auto& line : read_jsonl_file(path)) {
        corpus.documents.push_back(line.get<CorpusDocument>());
    }
    if (corpus.documents.empty()) throw EmptyCorpusError("no documents in " + path.string());
    return corpus;
}

} // namespace semcons
