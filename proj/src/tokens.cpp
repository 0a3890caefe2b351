#include "corank/tokens.hpp"

#include "corank/text.hpp"

namespace corank {

std::size_t HeuristicTokenCounter::count(std::string_view text) const
{
    const std::size_t words = split_whitespace(text).size();
    return (words * 4 + 2) / 3;
}

const TokenCounter& default_token_counter()
{
    static const HeuristicTokenCounter counter;
    return counter;
}

}  // namespace corank
