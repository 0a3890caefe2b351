#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace corank {

enum class FeatureKind { Category = 0, Sections = 1, Keywords = 2, PseudoQueries = 3 };

inline constexpr std::array<FeatureKind, 4> kAllFeatureKinds{FeatureKind::Category, FeatureKind::Sections,
                                                             FeatureKind::Keywords, FeatureKind::PseudoQueries};

std::string_view feature_name(FeatureKind kind);

/// Zero-shot extraction prompt with `{document}` substituted verbatim.
std::string render_extraction_prompt(FeatureKind kind, std::string_view document);

/// Recovers (kind, document) from a prompt produced by render_extraction_prompt.
std::optional<std::pair<FeatureKind, std::string>> parse_extraction_prompt(std::string_view prompt);

/// Listwise reranking prompt. Query and passages are whitespace-collapsed so
/// every passage occupies exactly one `[i]` line. Throws on an empty list.
std::string build_listwise_prompt(std::string_view query, std::span<const std::string> passages);

struct ListwisePrompt {
    std::string query;
    std::vector<std::string> passages;
};

/// Inverse of build_listwise_prompt; nullopt for anything else.
std::optional<ListwisePrompt> parse_listwise_prompt(std::string_view prompt);

}  // namespace corank
