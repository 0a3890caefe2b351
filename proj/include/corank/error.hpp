#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corank {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed record in an input file. `line` is 1-based.
class FormatError : public Error {
  public:
    FormatError(std::string source, std::size_t line, const std::string& detail);

    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::string source_;
    std::size_t line_;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

/// An LLM answer that could not be turned into a valid ranking.
class RankingParseError : public Error {
  public:
    RankingParseError(const std::string& detail, std::string raw);
    [[nodiscard]] const std::string& raw_text() const noexcept { return raw_; }

  private:
    std::string raw_;
};

/// A feature-extraction answer that could not be parsed into its type.
class ExtractionError : public Error {
  public:
    ExtractionError(const std::string& detail, std::string raw);
    [[nodiscard]] const std::string& raw_response() const noexcept { return raw_; }

  private:
    std::string raw_;
};

/// Non-retryable backend failure, or a retryable one after the retry budget is spent.
class BackendError : public Error {
  public:
    explicit BackendError(const std::string& detail, int attempts = 1);
    [[nodiscard]] int attempts() const noexcept { return attempts_; }

  private:
    int attempts_;
};

/// Retryable transport failure (connection error, 429, 5xx).
class TransportError : public Error {
  public:
    using Error::Error;
};

class ReplayMissError : public Error {
  public:
    explicit ReplayMissError(std::string digest);
    [[nodiscard]] const std::string& digest() const noexcept { return digest_; }

  private:
    std::string digest_;
};

class EmbeddingError : public Error {
  public:
    using Error::Error;
};

/// Failure during reranking, tagged with the query and pipeline stage.
class RerankError : public Error {
  public:
    RerankError(std::string query_id, std::string stage, const std::string& detail);
    [[nodiscard]] const std::string& query_id() const noexcept { return query_id_; }
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

  private:
    std::string query_id_;
    std::string stage_;
};

}  // namespace corank
