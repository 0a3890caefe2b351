#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "corank/error.hpp"
#include "corank/llm_backend.hpp"
#include "corank/prompts.hpp"
#include "corank/text.hpp"
#include "corank/tokens.hpp"

namespace corank {

namespace {

const std::unordered_set<std::string>& stopwords()
{
    static const std::unordered_set<std::string> words{
        "a",     "an",   "and",   "are",  "as",    "at",    "be",   "by",    "can",  "for",  "from", "has",
        "have",  "in",   "into",  "is",   "it",    "its",   "of",   "on",    "or",   "our",  "that", "the",
        "their", "this", "these", "to",   "we",    "which", "with", "while", "was",  "were", "show", "using",
        "also",  "both", "such",  "than", "then",  "they",  "used", "use",   "over", "more", "most", "new",
        "paper", "propose", "proposed", "approach", "method", "results", "based", "not", "but", "via"};
    return words;
}

std::vector<std::string> content_words(std::string_view text)
{
    std::vector<std::string> out;
    for (auto& t : word_tokens(text)) {
        if (t.size() >= 4 && !stopwords().contains(t)) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::string capitalize(std::string word)
{
    if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') {
        word[0] = static_cast<char>(word[0] - 'a' + 'A');
    }
    return word;
}

std::vector<std::string> sentences(std::string_view text)
{
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        current.push_back(c);
        if (c == '.' || c == '?' || c == '!' || c == ':') {
            auto s = trim(current);
            if (s.size() > 1) {
                out.push_back(std::move(s));
            }
            current.clear();
        }
    }
    if (auto s = trim(current); !s.empty()) {
        out.push_back(std::move(s));
    }
    return out;
}

/// Content words by descending frequency, ties by first occurrence.
std::vector<std::string> ranked_terms(std::string_view text)
{
    const auto words = content_words(text);
    std::unordered_map<std::string, std::pair<int, std::size_t>> stats;
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto [it, inserted] = stats.try_emplace(words[i], 0, i);
        ++it->second.first;
    }
    std::vector<std::string> terms;
    terms.reserve(stats.size());
    for (const auto& [w, s] : stats) {
        terms.push_back(w);
    }
    std::sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
        const auto& sa = stats.at(a);
        const auto& sb = stats.at(b);
        if (sa.first != sb.first) {
            return sa.first > sb.first;
        }
        return sa.second < sb.second;
    });
    return terms;
}

std::string first_words(std::string_view text, std::size_t n)
{
    auto words = split_whitespace(text);
    words.resize(std::min(words.size(), n));
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) {
            out += ' ';
        }
        out += w;
    }
    while (!out.empty() && (out.back() == '.' || out.back() == ':' || out.back() == ',')) {
        out.pop_back();
    }
    return out;
}

std::string heuristic_category(std::string_view document)
{
    auto terms = ranked_terms(document);
    const auto lead = terms.empty() ? std::string("General") : capitalize(terms[0]);
    const auto second = terms.size() > 1 ? capitalize(terms[1]) : std::string("Studies");
    auto all = sentences(document);
    auto title = all.empty() ? std::string("Untitled Document") : first_words(all[0], 14);
    return fmt::format("Science -> {} {} -> {}", lead, second, title);
}

std::string heuristic_sections(std::string_view document)
{
    auto all = sentences(document);
    std::string out = "Suggested sections:\n";
    std::size_t n = 0;
    for (const auto& s : all) {
        if (n == 8) {
            break;
        }
        auto heading = first_words(s, 7);
        if (heading.empty()) {
            continue;
        }
        out += fmt::format("{}. {}\n", ++n, heading);
    }
    if (n == 0) {
        out += "1. Overview\n";
    }
    return out;
}

std::vector<std::string> heuristic_keyword_list(std::string_view document)
{
    auto keywords = ranked_terms(document);
    const auto words = content_words(document);
    std::unordered_set<std::string> seen(keywords.begin(), keywords.end());
    for (std::size_t i = 0; i + 1 < words.size() && keywords.size() < 40; ++i) {
        auto bigram = words[i] + " " + words[i + 1];
        if (seen.insert(bigram).second) {
            keywords.push_back(std::move(bigram));
        }
    }
    if (keywords.size() > 40) {
        keywords.resize(40);
    }
    if (keywords.empty()) {
        keywords.emplace_back("document");
    }
    return keywords;
}

std::string heuristic_keywords(std::string_view document)
{
    const auto keywords = heuristic_keyword_list(document);
    std::string out = "Keywords: ";
    for (std::size_t i = 0; i < keywords.size(); ++i) {
        out += (i == 0 ? "" : ", ") + keywords[i];
    }
    return out;
}

std::string heuristic_pseudo_queries(std::string_view document)
{
    const auto keywords = heuristic_keyword_list(document);
    static constexpr std::array<std::string_view, 4> patterns{
        "papers on {}", "what is known about {}", "recent work on {}", "how does {} work"};
    std::string out;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto& kw = keywords[i % keywords.size()];
        const auto& pattern = patterns[(i / keywords.size() + i) % patterns.size()];
        out += fmt::format("{}. {}\n", i + 1, fmt::format(fmt::runtime(pattern), kw));
    }
    return out;
}

}  // namespace

std::string mock_rank_by_overlap(std::string_view query, std::span<const std::string> passages)
{
    const auto q = word_tokens(query);
    const std::unordered_set<std::string> query_terms(q.begin(), q.end());
    std::vector<std::size_t> overlap(passages.size(), 0);
    for (std::size_t i = 0; i < passages.size(); ++i) {
        auto t = word_tokens(passages[i]);
        const std::unordered_set<std::string> terms(t.begin(), t.end());
        for (const auto& term : terms) {
            overlap[i] += query_terms.contains(term) ? 1 : 0;
        }
    }
    std::vector<std::size_t> order(passages.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return overlap[a] > overlap[b]; });
    std::string out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out += fmt::format("{}[{}]", i == 0 ? "" : " > ", order[i] + 1);
    }
    return out;
}

void MockBackend::push_response(std::string text)
{
    std::lock_guard lock(mutex_);
    scripted_.push_back(std::move(text));
}

void MockBackend::set_handler(Handler handler)
{
    std::lock_guard lock(mutex_);
    handler_ = std::move(handler);
}

ChatResponse MockBackend::complete(const ChatRequest& request)
{
    request.validate();
    ++calls_;
    std::optional<std::string> text;
    Handler handler;
    {
        std::lock_guard lock(mutex_);
        handler = handler_;
    }
    if (handler) {
        text = handler(request);
    }
    if (!text) {
        std::lock_guard lock(mutex_);
        if (!scripted_.empty()) {
            text = std::move(scripted_.front());
            scripted_.pop_front();
        }
    }
    if (!text) {
        if (auto listwise = parse_listwise_prompt(request.prompt)) {
            text = mock_rank_by_overlap(listwise->query, listwise->passages);
        } else if (auto extraction = parse_extraction_prompt(request.prompt)) {
            const auto& doc = extraction->second;
            switch (extraction->first) {
            case FeatureKind::Category: text = heuristic_category(doc); break;
            case FeatureKind::Sections: text = heuristic_sections(doc); break;
            case FeatureKind::Keywords: text = heuristic_keywords(doc); break;
            case FeatureKind::PseudoQueries: text = heuristic_pseudo_queries(doc); break;
            }
        }
    }
    if (!text) {
        throw BackendError("mock backend has no answer for this prompt");
    }
    ChatResponse response;
    response.prompt_tokens = static_cast<std::int64_t>(count_tokens(request.prompt));
    response.completion_tokens = static_cast<std::int64_t>(count_tokens(*text));
    response.text = std::move(*text);
    return response;
}

}  // namespace corank
