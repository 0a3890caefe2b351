#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "corank/embedding.hpp"
#include "corank/extraction.hpp"

namespace corank {

/// Numbered 1-4 in increasing richness.
enum class RepresentationForm {
    PseudoQuery = 1,
    Category = 2,
    CategorySection = 3,
    CategorySectionKeywords = 4,
};

std::string_view form_name(RepresentationForm form);
/// Accepts 1-4 or the form name; throws ConfigError otherwise.
RepresentationForm parse_form(std::string_view text);

struct CompactRepresentation {
    std::string doc_id;
    RepresentationForm form = RepresentationForm::CategorySectionKeywords;
    std::string text;
    std::size_t token_estimate = 0;

    bool operator==(const CompactRepresentation&) const = default;
};

/// Form 4: `L1 -> L2 -> L3: <section> (<kw1>, ..., <kwK>)`; Form 3 drops the
/// parenthesized keywords (as does Form 4 with no keywords); Form 2 is the
/// path alone; Form 1 is the selected pseudo query. Throws Error naming the
/// form and the missing field when a required input is blank.
CompactRepresentation build_representation(RepresentationForm form, std::string_view doc_id,
                                           const CategoryPath& category, const SelectedFeatures& selected);

}  // namespace corank
