#pragma once

#include <cstddef>
#include <string_view>

namespace corank {

/// Estimates how many model tokens a text costs. Exact per-model tokenizers
/// implement this same interface.
class TokenCounter {
  public:
    virtual ~TokenCounter() = default;
    [[nodiscard]] virtual std::size_t count(std::string_view text) const = 0;
};

/// ceil(words * 4 / 3), words split on whitespace.
class HeuristicTokenCounter final : public TokenCounter {
  public:
    [[nodiscard]] std::size_t count(std::string_view text) const override;
};

const TokenCounter& default_token_counter();

inline std::size_t count_tokens(std::string_view text) { return default_token_counter().count(text); }

}  // namespace corank
