#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semcons {

// Base class for all pipeline errors. Every error carries a stable
// machine-readable code so the CLI can emit structured error records.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class MissingFileError : public Error {
public:
    explicit MissingFileError(const std::string& path)
        : Error("MissingFile", "file not found: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class MalformedCsvError : public Error {
public:
    MalformedCsvError(std::size_t row, const std::string& reason)
        : Error("MalformedCsv", "csv row " + std::to_string(row) + ": " + reason), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class EmptyDatasetError : public Error {
public:
    explicit EmptyDatasetError(const std::string& message)
        : Error("EmptyDataset", message) {}
};

class AllSourcesFailedError : public Error {
public:
    explicit AllSourcesFailedError(const std::string& message)
        : Error("AllSourcesFailed", message) {}
};

class EmptyCorpusError : public Error {
public:
    explicit EmptyCorpusError(const std::string& message)
        : Error("EmptyCorpus", message) {}
};

class BackendError : public Error {
public:
    BackendError(int attempts, const std::string& cause)
        : Error("BackendError",
                "backend failed after " + std::to_string(attempts) + " attempt(s): " + cause),
          attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class JudgeUnavailableError : public Error {
public:
    explicit JudgeUnavailableError(const std::string& message)
        : Error("JudgeUnavailable", message) {}
};

class DegenerateSampleSizeError : public Error {
public:
    explicit DegenerateSampleSizeError(int n)
        : Error("DegenerateSampleSize",
                "consistency needs at least 2 responses, got " + std::to_string(n)) {}
};

class EmptyCategoryError : public Error {
public:
    explicit EmptyCategoryError(const std::string& message)
        : Error("EmptyCategory", message) {}
};

class MixedCategoryError : public Error {
public:
    explicit MixedCategoryError(const std::string& message)
        : Error("MixedCategory", message) {}
};

class CategoryMismatchError : public Error {
public:
    explicit CategoryMismatchError(const std::string& message)
        : Error("CategoryMismatch", message) {}
};

class BinMismatchError : public Error {
public:
    explicit BinMismatchError(const std::string& message)
        : Error("BinMismatch", message) {}
};

class MissingArtifactError : public Error {
public:
    explicit MissingArtifactError(const std::string& path)
        : Error("MissingArtifact", "missing artifact: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message)
        : Error("ConfigError", message) {}
};

class StageDependencyMissingError : public Error {
public:
    explicit StageDependencyMissingError(const std::string& artifact)
        : Error("StageDependencyMissing", "run stage producing '" + artifact + "' first"),
          artifact_(artifact) {}
    const std::string& artifact() const noexcept { return artifact_; }

private:
    std::string artifact_;
};

} // namespace semcons
