#include "corank/error.hpp"

namespace corank {

FormatError::FormatError(std::string source, std::size_t line, const std::string& detail)
    : Error(source + ":" + std::to_string(line) + ": " + detail), source_(std::move(source)), line_(line)
{}

RankingParseError::RankingParseError(const std::string& detail, std::string raw)
    : Error(detail), raw_(std::move(raw))
{}

ExtractionError::ExtractionError(const std::string& detail, std::string raw)
    : Error(detail), raw_(std::move(raw))
{}

BackendError::BackendError(const std::string& detail, int attempts)
    : Error(detail + " (after " + std::to_string(attempts) + (attempts == 1 ? " attempt)" : " attempts)")),
      attempts_(attempts)
{}

ReplayMissError::ReplayMissError(std::string digest)
    : Error("replay cache miss for request " + digest), digest_(std::move(digest))
{}

RerankError::RerankError(std::string query_id, std::string stage, const std::string& detail)
    : Error("query " + query_id + " [" + stage + "]: " + detail),
      query_id_(std::move(query_id)),
      stage_(std::move(stage))
{}

}  // namespace corank
