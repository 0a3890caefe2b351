#include "corank/prompts.hpp"

#include <fmt/format.h>

#include "corank/error.hpp"
#include "corank/text.hpp"

namespace corank {

namespace {

struct ExtractionTemplate {
    std::string_view head;
    std::string_view tail;
};

// Each template is `head + "\n" + document + "\n" + tail`.
constexpr std::array<ExtractionTemplate, 4> kExtractionTemplates{{
    {"Please analyze this document for its topic and categories:",
     "Provide a comprehensive analysis that includes:\n"
     "1. The broad category (coarse-grained) this document belongs to\n"
     "2. The specific category (fine-grained) within that broad category\n"
     "3. A concise, title-like description of the document's topic\n"
     "Deliver the analysis in one concise paragraph."},
    {"Identify 3-8 logical sections that would effectively organize this document's content:",
     "Generate appropriate subtitle-style headings for each section that would help structure the document. "
     "Sections should be comprehensive and cover the full scope of the content."},
    {"Extract a comprehensive list of at least 30 diverse keywords and concepts from this document:",
     "Generate as many diverse, relevant keywords and concepts as possible. "
     "Include both specific terms and broader conceptual themes."},
    {"Generate 20 diverse search queries that users might enter to find this document:",
     "Create different types of queries that cover various aspects of the document content. "
     "Queries should be diverse in wording, length, and specificity."},
}};

constexpr std::string_view kRerankIntro =
    "You are an LLM reranker, an intelligent assistant that can rank passages based on their relevancy to the query.";
constexpr std::string_view kRerankProvide =
    "I will provide you with {} passages (either represented by full text, previous user query, keywords or "
    "structured analysis), each indicated by a numerical identifier [].";
constexpr std::string_view kRerankTask = "Rank the passages based on their relevance to the search query: ";
constexpr std::string_view kSearchQuery = "Search Query: ";
constexpr std::string_view kRerankOutro =
    "Rank the {} passages above based on their relevance to the search query. All the passages should be in "
    "descending order of relevance.\n"
    "The output format should be [passage_id] > [passage_id] > ..., (If the full list is very long, generate at "
    "least 10) e.g., [4] > [2] > ... Only respond with the ranking results, do not say any word or explain.";

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string_view feature_name(FeatureKind kind)
{
    switch (kind) {
    case FeatureKind::Category: return "category";
    case FeatureKind::Sections: return "sections";
    case FeatureKind::Keywords: return "keywords";
    case FeatureKind::PseudoQueries: return "pseudo_queries";
    }
    return "unknown";
}

std::string render_extraction_prompt(FeatureKind kind, std::string_view document)
{
    const auto& t = kExtractionTemplates[static_cast<std::size_t>(kind)];
    std::string out;
    out.reserve(t.head.size() + document.size() + t.tail.size() + 2);
    out.append(t.head).append("\n").append(document).append("\n").append(t.tail);
    return out;
}

std::optional<std::pair<FeatureKind, std::string>> parse_extraction_prompt(std::string_view prompt)
{
    for (auto kind : kAllFeatureKinds) {
        const auto& t = kExtractionTemplates[static_cast<std::size_t>(kind)];
        const auto min_size = t.head.size() + t.tail.size() + 2;
        if (prompt.size() < min_size || !starts_with(prompt, t.head) || !ends_with(prompt, t.tail)
            || prompt[t.head.size()] != '\n' || prompt[prompt.size() - t.tail.size() - 1] != '\n') {
            continue;
        }
        auto document = prompt.substr(t.head.size() + 1, prompt.size() - min_size);
        return std::pair{kind, std::string(document)};
    }
    return std::nullopt;
}

std::string build_listwise_prompt(std::string_view query, std::span<const std::string> passages)
{
    if (passages.empty()) {
        throw Error("listwise prompt needs at least one passage");
    }
    const auto q = collapse_whitespace(query);
    const auto num = passages.size();
    std::string out;
    out.append(kRerankIntro).append("\n");
    out.append(fmt::format(fmt::runtime(kRerankProvide), num)).append("\n");
    out.append(kRerankTask).append(q).append(".\n");
    for (std::size_t i = 0; i < num; ++i) {
        out.append(fmt::format("[{}]", i + 1)).append(collapse_whitespace(passages[i])).append("\n");
    }
    out.append(kSearchQuery).append(q).append(".\n");
    out.append(fmt::format(fmt::runtime(kRerankOutro), num));
    return out;
}

std::optional<ListwisePrompt> parse_listwise_prompt(std::string_view prompt)
{
    const auto lines = split_lines(prompt);
    if (lines.size() < 6 || lines[0] != kRerankIntro || !starts_with(lines[2], kRerankTask)) {
        return std::nullopt;
    }
    ListwisePrompt parsed;
    std::size_t i = 3;
    for (; i < lines.size() && !starts_with(lines[i], kSearchQuery); ++i) {
        const auto tag = fmt::format("[{}]", parsed.passages.size() + 1);
        if (!starts_with(lines[i], tag)) {
            return std::nullopt;
        }
        parsed.passages.push_back(lines[i].substr(tag.size()));
    }
    if (i == lines.size() || parsed.passages.empty()) {
        return std::nullopt;
    }
    std::string_view q = lines[i];
    q.remove_prefix(kSearchQuery.size());
    if (!q.empty() && q.back() == '.') {
        q.remove_suffix(1);
    }
    parsed.query = std::string(q);
    return parsed;
}

}  // namespace corank
