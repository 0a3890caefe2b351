#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace corank {

/// Lowercased word tokens, split on anything that is not an ASCII letter or digit.
/// Bytes >= 0x80 are kept inside tokens so UTF-8 words stay whole.
std::vector<std::string> word_tokens(std::string_view text);

std::string to_lower(std::string_view text);
std::string_view trim_view(std::string_view text);
std::string trim(std::string_view text);

/// Replaces every run of whitespace with one space and trims the ends.
std::string collapse_whitespace(std::string_view text);

std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace corank
