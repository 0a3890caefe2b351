#include "corank/representation.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "corank/error.hpp"
#include "corank/text.hpp"
#include "corank/tokens.hpp"

namespace corank {

std::string_view form_name(RepresentationForm form)
{
    switch (form) {
    case RepresentationForm::PseudoQuery: return "pseudo_query";
    case RepresentationForm::Category: return "category";
    case RepresentationForm::CategorySection: return "category_section";
    case RepresentationForm::CategorySectionKeywords: return "category_section_keywords";
    }
    return "unknown";
}

RepresentationForm parse_form(std::string_view text)
{
    for (int i = 1; i <= 4; ++i) {
        const auto form = static_cast<RepresentationForm>(i);
        if (text == std::to_string(i) || text == form_name(form)) {
            return form;
        }
    }
    throw ConfigError(fmt::format("unknown representation form '{}' (expected 1-4)", text));
}

CompactRepresentation build_representation(RepresentationForm form, std::string_view doc_id,
                                           const CategoryPath& category, const SelectedFeatures& selected)
{
    auto require = [&](std::string_view value, std::string_view field) {
        if (trim_view(value).empty()) {
            throw Error(fmt::format("form {} ({}) for {} is missing {}", static_cast<int>(form), form_name(form),
                                    doc_id, field));
        }
    };

    std::string text;
    if (form == RepresentationForm::PseudoQuery) {
        require(selected.pseudo_query, "pseudo_query");
        text = selected.pseudo_query;
    } else {
        for (const auto& level : category.levels) {
            require(level, "category");
        }
        text = category.joined();
        if (form != RepresentationForm::Category) {
            require(selected.section, "section");
            text += ": " + selected.section;
        }
        if (form == RepresentationForm::CategorySectionKeywords && !selected.keywords.empty()) {
            text += fmt::format(" ({})", fmt::join(selected.keywords, ", "));
        }
    }
    const auto tokens = count_tokens(text);
    return CompactRepresentation{std::string(doc_id), form, std::move(text), tokens};
}

}  // namespace corank
