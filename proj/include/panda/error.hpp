#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace panda {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag (e.g. "DuplicateId") used in reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// preference extraction
class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, const std::string& why)
        : Error("MalformedRecord", "line " + std::to_string(line) + ": " + why), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(std::string id) : Error("DuplicateId", id), id_(std::move(id)) {}
    [[nodiscard]] const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class EmptyCandidates : public Error {
public:
    explicit EmptyCandidates(const std::string& id) : Error("EmptyCandidates", id) {}
};

class NTooLarge : public Error {
public:
    NTooLarge(std::size_t n, std::size_t available)
        : Error("NTooLarge", "requested " + std::to_string(n) + ", available " + std::to_string(available)),
          n_(n), available_(available) {}
    [[nodiscard]] std::size_t requested() const noexcept { return n_; }
    [[nodiscard]] std::size_t available() const noexcept { return available_; }

private:
    std::size_t n_;
    std::size_t available_;
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error("LengthMismatch", what) {}
};

class NonFiniteScore : public Error {
public:
    explicit NonFiniteScore(const std::string& what) : Error("NonFiniteScore", what) {}
};

// prompt rendering
class MissingLabelMapping : public Error {
public:
    explicit MissingLabelMapping(const std::string& what) : Error("MissingLabelMapping", what) {}
};

class RankingTooShort : public Error {
public:
    RankingTooShort(std::size_t needed, std::size_t have)
        : Error("RankingTooShort", "needed " + std::to_string(needed) + ", have " + std::to_string(have)),
          needed_(needed), have_(have) {}
    [[nodiscard]] std::size_t needed() const noexcept { return needed_; }
    [[nodiscard]] std::size_t have() const noexcept { return have_; }

private:
    std::size_t needed_;
    std::size_t have_;
};

class EmptyInsight : public Error {
public:
    EmptyInsight() : Error("EmptyInsight", "insight text is empty after post-processing") {}
};

class MissingExemplars : public Error {
public:
    MissingExemplars(std::size_t shots, std::size_t have)
        : Error("MissingExemplars", "needed " + std::to_string(shots) + " exemplars, have " + std::to_string(have)) {}
};

class TemplateError : public Error {
public:
    explicit TemplateError(const std::string& what) : Error("TemplateError", what) {}
};

// embeddings / retrieval
class DimMismatch : public Error {
public:
    DimMismatch(std::size_t expected, std::size_t got)
        : Error("DimMismatch", "expected " + std::to_string(expected) + ", got " + std::to_string(got)) {}
};

class EmbeddingDimMismatch : public Error {
public:
    EmbeddingDimMismatch(std::size_t expected, std::size_t got)
        : Error("EmbeddingDimMismatch",
                "expected " + std::to_string(expected) + ", got " + std::to_string(got)) {}
};

class ProviderUnavailable : public Error {
public:
    explicit ProviderUnavailable(const std::string& what) : Error("ProviderUnavailable", what) {}
};

class PoolFormatError : public Error {
public:
    explicit PoolFormatError(const std::string& what) : Error("PoolFormatError", what) {}
};

// llm gateway
class ProviderError : public Error {
public:
    ProviderError(int status, std::string body)
        : Error("ProviderError", "status " + std::to_string(status) + ": " + body),
          status_(status), body_(std::move(body)) {}
    [[nodiscard]] int status() const noexcept { return status_; }
    [[nodiscard]] const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

class Timeout : public Error {
public:
    explicit Timeout(const std::string& what) : Error("Timeout", what) {}
};

class CacheCorrupt : public Error {
public:
    CacheCorrupt(const std::string& path, const std::string& why) : Error("CacheCorrupt", path + ": " + why) {}
};

// evaluation
class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error("EmptyInput", what) {}
};

class InvalidTA : public Error {
public:
    explicit InvalidTA(double ta) : Error("InvalidTA", "target accuracy must be in (0, 1], got " + std::to_string(ta)) {}
};

class EnvProtocolError : public Error {
public:
    explicit EnvProtocolError(const std::string& what) : Error("EnvProtocolError", what) {}
};

class EmptyResults : public Error {
public:
    EmptyResults() : Error("EmptyResults", "no episode results to aggregate") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

}  // namespace panda
