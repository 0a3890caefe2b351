#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace corank {

struct TokenCount {
    std::int64_t prompt = 0;
    std::int64_t completion = 0;

    [[nodiscard]] std::int64_t total() const noexcept { return prompt + completion; }
    bool operator==(const TokenCount&) const = default;
};

/// Prompt/completion token usage broken down by pipeline stage. Totals are
/// always the sum of the stage entries.
class TokenLedger {
  public:
    void record(std::string_view stage, std::int64_t prompt_tokens, std::int64_t completion_tokens);
    void merge(const TokenLedger& other);

    [[nodiscard]] std::int64_t prompt_tokens() const noexcept { return total_.prompt; }
    [[nodiscard]] std::int64_t completion_tokens() const noexcept { return total_.completion; }
    [[nodiscard]] std::int64_t total_tokens() const noexcept { return total_.total(); }
    [[nodiscard]] const std::map<std::string, TokenCount, std::less<>>& stages() const noexcept { return stages_; }
    [[nodiscard]] bool empty() const noexcept { return stages_.empty(); }

    [[nodiscard]] nlohmann::json to_json() const;
    static TokenLedger from_json(const nlohmann::json& j);

    bool operator==(const TokenLedger&) const = default;

  private:
    std::map<std::string, TokenCount, std::less<>> stages_;
    TokenCount total_;
};

}  // namespace corank
