#include "corank/extraction.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <span>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "corank/error.hpp"
#include "corank/fileio.hpp"
#include "corank/text.hpp"

namespace corank {

using nlohmann::json;

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

void erase_all(std::string& s, std::string_view token)
{
    for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token, pos)) {
        s.erase(pos, token.size());
    }
}

std::string strip_emphasis(std::string_view text)
{
    std::string s(text);
    erase_all(s, "**");
    erase_all(s, "__");
    erase_all(s, "`");
    return s;
}

std::string strip_quotes(std::string_view text)
{
    auto s = trim(text);
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 3> pairs{
        {{"\"", "\""}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"'", "'"}}};
    for (const auto& [open, close] : pairs) {
        if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
            s = trim(std::string_view(s).substr(open.size(), s.size() - open.size() - close.size()));
        }
    }
    return s;
}

std::string strip_trailing(std::string s, std::string_view chars)
{
    while (!s.empty() && chars.find(s.back()) != std::string_view::npos) {
        s.pop_back();
    }
    return trim(s);
}

struct ListItem {
    std::string text;
    bool marked = false;
};

/// Removes one leading list marker: bullets, `#` headings, `1.` / `1)` / `(1)`,
/// and `Section 3:` style prefixes.
ListItem strip_marker(std::string_view raw)
{
    std::string s = trim(strip_emphasis(raw));
    bool marked = false;

    std::size_t hashes = 0;
    while (hashes < s.size() && s[hashes] == '#') {
        ++hashes;
    }
    if (hashes > 0 && hashes < s.size() && s[hashes] == ' ') {
        s = trim(std::string_view(s).substr(hashes));
        marked = true;
    }

    for (std::string_view bullet : {"- ", "* ", "+ ", "\xE2\x80\xA2 ", "\xE2\x80\x93 "}) {
        if (s.starts_with(bullet)) {
            s = trim(std::string_view(s).substr(bullet.size()));
            marked = true;
            break;
        }
    }

    std::size_t i = 0;
    bool paren = false;
    if (!s.empty() && s[0] == '(') {
        paren = true;
        i = 1;
    }
    std::size_t digits_begin = i;
    while (i < s.size() && is_digit(s[i])) {
        ++i;
    }
    if (i > digits_begin && i < s.size()) {
        const char c = s[i];
        const bool closes = paren ? c == ')' : (c == '.' || c == ')' || c == ':');
        if (closes && (i + 1 == s.size() || s[i + 1] == ' ')) {
            s = trim(std::string_view(s).substr(i + 1));
            marked = true;
        }
    }

    // "Section 2: Foo", "Query 7 - Foo", "Heading 1. Foo"
    for (std::string_view word : {"section ", "query ", "heading ", "keyword "}) {
        auto lower = to_lower(s.substr(0, word.size()));
        if (lower != word) {
            continue;
        }
        std::size_t j = word.size();
        std::size_t start = j;
        while (j < s.size() && is_digit(s[j])) {
            ++j;
        }
        if (j == start) {
            break;
        }
        auto rest = trim_view(std::string_view(s).substr(j));
        if (!rest.empty() && (rest[0] == ':' || rest[0] == '.' || rest[0] == '-' || rest[0] == ')')) {
            s = trim(rest.substr(1));
            marked = true;
        }
        break;
    }
    return {s, marked};
}

/// `Label: value` -> value when the label mentions one of `label_words`.
std::string strip_label(std::string_view text, std::span<const std::string_view> label_words)
{
    auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        return std::string(text);
    }
    auto label = to_lower(text.substr(0, colon));
    if (split_whitespace(label).size() > 5) {
        return std::string(text);
    }
    for (auto w : label_words) {
        if (label.find(w) != std::string::npos) {
            return trim(text.substr(colon + 1));
        }
    }
    return std::string(text);
}

std::string normalize_arrows(std::string_view text)
{
    std::string s(text);
    for (std::string_view arrow : {"\xE2\x86\x92", "\xE2\x87\x92", "=>", "-->"}) {
        for (auto pos = s.find(arrow); pos != std::string::npos; pos = s.find(arrow, pos)) {
            s.replace(pos, arrow.size(), "->");
        }
    }
    return s;
}

std::vector<std::string> split_on(std::string_view text, std::string_view sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + sep.size();
    }
    return parts;
}

constexpr std::array<std::string_view, 10> kCategoryLabels{
    "category", "topic", "description", "title", "field", "area", "level", "domain", "broad", "specific"};

std::string clean_level(std::string_view text)
{
    return strip_trailing(strip_quotes(strip_emphasis(text)), ".;,");
}

std::vector<std::string> collect_items(std::string_view response)
{
    std::vector<ListItem> items;
    bool any_marked = false;
    for (const auto& line : split_lines(response)) {
        auto item = strip_marker(line);
        if (item.text.empty()) {
            continue;
        }
        any_marked = any_marked || item.marked;
        items.push_back(std::move(item));
    }
    std::vector<std::string> out;
    for (auto& item : items) {
        if (any_marked && !item.marked) {
            continue;
        }
        if (!item.marked && item.text.back() == ':') {
            continue;  // preamble such as "Here are the sections:"
        }
        auto text = strip_trailing(strip_quotes(item.text), ":");
        if (!text.empty()) {
            out.push_back(std::move(text));
        }
    }
    return out;
}

void warn(std::vector<std::string>* warnings, std::string message)
{
    spdlog::warn("{}", message);
    if (warnings != nullptr) {
        warnings->push_back(std::move(message));
    }
}

}  // namespace

std::string CategoryPath::joined() const { return levels[0] + " -> " + levels[1] + " -> " + levels[2]; }

std::vector<std::string> dedup_case_insensitive(std::vector<std::string> items)
{
    std::unordered_set<std::string> seen;
    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto& item : items) {
        auto t = trim(item);
        if (t.empty()) {
            continue;
        }
        if (seen.insert(to_lower(t)).second) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

CategoryPath parse_category(std::string_view response)
{
    const auto normalized = normalize_arrows(strip_emphasis(response));
    for (const auto& line : split_lines(normalized)) {
        auto parts = split_on(line, "->");
        if (parts.size() < 3) {
            continue;
        }
        auto first = strip_marker(parts.front()).text;
        parts.front() = strip_label(first, kCategoryLabels);
        std::vector<std::string> levels;
        for (const auto& p : parts) {
            if (auto level = clean_level(p); !level.empty()) {
                levels.push_back(std::move(level));
            }
        }
        if (levels.size() >= 3) {
            return CategoryPath{{levels[0], levels[1], levels.back()}};
        }
    }

    std::vector<std::string> levels;
    for (const auto& line : split_lines(normalized)) {
        auto item = strip_marker(line);
        auto value = strip_label(item.text, kCategoryLabels);
        const bool labeled = value.size() != item.text.size();
        if (!item.marked && !labeled) {
            continue;
        }
        if (auto level = clean_level(value); !level.empty()) {
            levels.push_back(std::move(level));
        }
        if (levels.size() == 3) {
            return CategoryPath{{levels[0], levels[1], levels[2]}};
        }
    }
    throw ExtractionError(fmt::format("category response has {} recoverable levels, need 3", levels.size()),
                          std::string(response));
}

std::vector<std::string> parse_sections(std::string_view response, std::vector<std::string>* warnings)
{
    auto sections = dedup_case_insensitive(collect_items(response));
    if (sections.empty()) {
        throw ExtractionError("no section headings in response", std::string(response));
    }
    if (sections.size() < 3 || sections.size() > 8) {
        warn(warnings, fmt::format("expected 3-8 sections, got {}", sections.size()));
    }
    return sections;
}

std::vector<std::string> parse_keywords(std::string_view response, std::vector<std::string>* warnings)
{
    std::vector<std::string> terms;
    for (const auto& line : split_lines(response)) {
        auto item = strip_marker(line);
        static constexpr std::array<std::string_view, 4> labels{"keyword", "concept", "term", "theme"};
        auto body = strip_label(item.text, labels);
        if (trim_view(body).empty() || (body == item.text && !item.marked && body.back() == ':')) {
            continue;
        }
        std::string current;
        auto flush = [&] {
            auto t = strip_trailing(strip_quotes(strip_emphasis(current)), ".");
            if (!t.empty()) {
                terms.push_back(std::move(t));
            }
            current.clear();
        };
        for (char c : body) {
            if (c == ',' || c == ';') {
                flush();
            } else {
                current.push_back(c);
            }
        }
        flush();
    }
    auto keywords = dedup_case_insensitive(std::move(terms));
    if (keywords.empty()) {
        throw ExtractionError("no keywords in response", std::string(response));
    }
    if (keywords.size() < 30) {
        warn(warnings, fmt::format("expected at least 30 keywords, got {}", keywords.size()));
    }
    return keywords;
}

std::vector<std::string> parse_pseudo_queries(std::string_view response, std::vector<std::string>* warnings)
{
    auto queries = dedup_case_insensitive(collect_items(response));
    if (queries.empty()) {
        throw ExtractionError("no queries in response", std::string(response));
    }
    if (queries.size() != 20) {
        warn(warnings, fmt::format("expected 20 pseudo queries, got {}", queries.size()));
    }
    return queries;
}

void FeatureSet::validate() const
{
    auto check_list = [&](const std::vector<std::string>& items, std::string_view name) {
        if (items.empty()) {
            throw ExtractionError(fmt::format("feature set for {} has no {}", doc_id, name), "");
        }
        std::unordered_set<std::string> seen;
        for (const auto& item : items) {
            if (item.empty() || trim_view(item).size() != item.size()) {
                throw ExtractionError(fmt::format("feature set for {} has a blank or untrimmed {} entry", doc_id, name),
                                      item);
            }
            if (!seen.insert(to_lower(item)).second) {
                throw ExtractionError(fmt::format("feature set for {} repeats {} entry", doc_id, name), item);
            }
        }
    };
    for (const auto& level : category.levels) {
        if (level.empty() || trim_view(level).size() != level.size()) {
            throw ExtractionError("feature set for " + doc_id + " has a blank category level", category.joined());
        }
    }
    check_list(sections, "sections");
    check_list(keywords, "keywords");
    check_list(pseudo_queries, "pseudo_queries");
}

namespace {

std::string ask(FeatureKind kind, const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                TokenLedger* ledger)
{
    if (trim_view(doc.text()).empty()) {
        throw Error("document " + doc.doc_id() + " has no text to extract from");
    }
    ChatRequest request{options.model, render_extraction_prompt(kind, doc.text()), options.temperature, options.seed,
                        options.max_output_tokens};
    auto response = backend.complete(request);
    if (ledger != nullptr) {
        ledger->record("extraction", response.prompt_tokens, response.completion_tokens);
    }
    return std::move(response.text);
}

}  // namespace

CategoryPath extract_category(const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                              TokenLedger* ledger)
{
    return parse_category(ask(FeatureKind::Category, doc, backend, options, ledger));
}

std::vector<std::string> extract_sections(const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                                          TokenLedger* ledger, std::vector<std::string>* warnings)
{
    return parse_sections(ask(FeatureKind::Sections, doc, backend, options, ledger), warnings);
}

std::vector<std::string> extract_keywords(const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                                          TokenLedger* ledger, std::vector<std::string>* warnings)
{
    return parse_keywords(ask(FeatureKind::Keywords, doc, backend, options, ledger), warnings);
}

std::vector<std::string> extract_pseudo_queries(const Document& doc, ChatBackend& backend,
                                                const ExtractionOptions& options, TokenLedger* ledger,
                                                std::vector<std::string>* warnings)
{
    return parse_pseudo_queries(ask(FeatureKind::PseudoQueries, doc, backend, options, ledger), warnings);
}

FeatureSet extract_features(const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                            TokenLedger* ledger, std::vector<std::string>* warnings)
{
    FeatureSet features;
    features.doc_id = doc.doc_id();
    features.category = extract_category(doc, backend, options, ledger);
    features.sections = extract_sections(doc, backend, options, ledger, warnings);
    features.keywords = extract_keywords(doc, backend, options, ledger, warnings);
    features.pseudo_queries = extract_pseudo_queries(doc, backend, options, ledger, warnings);
    features.extractor_model = options.model;
    features.validate();
    return features;
}

json feature_set_to_json(const FeatureSet& f)
{
    return {{"doc_id", f.doc_id},
            {"category_levels", f.category.levels},
            {"sections", f.sections},
            {"keywords", f.keywords},
            {"pseudo_queries", f.pseudo_queries},
            {"extractor_model", f.extractor_model}};
}

FeatureSet feature_set_from_json(const json& j)
{
    FeatureSet f;
    f.doc_id = j.at("doc_id").get<std::string>();
    const auto levels = j.at("category_levels").get<std::vector<std::string>>();
    if (levels.size() != 3) {
        throw Error("category_levels must hold exactly 3 entries for " + f.doc_id);
    }
    f.category.levels = {levels[0], levels[1], levels[2]};
    f.sections = j.at("sections").get<std::vector<std::string>>();
    f.keywords = j.at("keywords").get<std::vector<std::string>>();
    f.pseudo_queries = j.at("pseudo_queries").get<std::vector<std::string>>();
    f.extractor_model = j.at("extractor_model").get<std::string>();
    f.validate();
    return f;
}

FeatureStore::FeatureStore(std::filesystem::path path) : path_(std::move(path))
{
    if (path_.empty() || !std::filesystem::exists(path_)) {
        return;
    }
    const auto lines = read_lines(path_);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim_view(lines[i]).empty()) {
            continue;
        }
        try {
            auto f = feature_set_from_json(json::parse(lines[i]));
            auto id = f.doc_id;
            features_.insert_or_assign(std::move(id), std::move(f));
        } catch (const std::exception& e) {
            throw FormatError(path_.string(), i + 1, std::string("bad feature record: ") + e.what());
        }
    }
}

bool FeatureStore::contains(std::string_view doc_id) const { return find(doc_id) != nullptr; }

const FeatureSet* FeatureStore::find(std::string_view doc_id) const
{
    std::shared_lock lock(mutex_);
    auto it = features_.find(std::string(doc_id));
    return it == features_.end() ? nullptr : &it->second;
}

std::size_t FeatureStore::size() const
{
    std::shared_lock lock(mutex_);
    return features_.size();
}

void FeatureStore::put(FeatureSet features)
{
    features.validate();
    std::unique_lock lock(mutex_);
    if (!path_.empty()) {
        if (path_.has_parent_path()) {
            std::filesystem::create_directories(path_.parent_path());
        }
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        if (!out) {
            throw Error("cannot append to feature store " + path_.string());
        }
        out << feature_set_to_json(features).dump() << '\n';
    }
    auto id = features.doc_id;
    features_.insert_or_assign(std::move(id), std::move(features));
}

ExtractionReport extract_all(const Corpus& corpus, ChatBackend& backend, FeatureStore& store,
                             const ExtractionOptions& options, std::size_t parallelism)
{
    ExtractionReport report;
    std::vector<const Document*> pending;
    for (const auto& doc : corpus) {
        if (store.contains(doc.doc_id())) {
            ++report.skipped;
        } else {
            pending.push_back(&doc);
        }
    }

    struct Outcome {
        TokenLedger tokens;
        std::array<bool, 4> ok{};
        std::size_t warnings = 0;
        std::string error;
    };
    std::vector<Outcome> outcomes(pending.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < pending.size(); i = next.fetch_add(1)) {
            const auto& doc = *pending[i];
            auto& outcome = outcomes[i];
            std::vector<std::string> warnings;
            try {
                FeatureSet f;
                f.doc_id = doc.doc_id();
                f.extractor_model = options.model;
                f.category = extract_category(doc, backend, options, &outcome.tokens);
                outcome.ok[0] = true;
                f.sections = extract_sections(doc, backend, options, &outcome.tokens, &warnings);
                outcome.ok[1] = true;
                f.keywords = extract_keywords(doc, backend, options, &outcome.tokens, &warnings);
                outcome.ok[2] = true;
                f.pseudo_queries = extract_pseudo_queries(doc, backend, options, &outcome.tokens, &warnings);
                outcome.ok[3] = true;
                store.put(std::move(f));
            } catch (const std::exception& e) {
                outcome.error = e.what();
                spdlog::error("extraction failed for {}: {}", doc.doc_id(), e.what());
            }
            outcome.warnings = warnings.size();
        }
    };

    const auto threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(pending.size(), 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    for (std::size_t i = 0; i < pending.size(); ++i) {
        const auto& outcome = outcomes[i];
        report.tokens.merge(outcome.tokens);
        report.warnings += outcome.warnings;
        for (std::size_t k = 0; k < 4; ++k) {
            report.feature_successes[k] += outcome.ok[k] ? 1 : 0;
        }
        if (outcome.error.empty()) {
            ++report.extracted;
        } else {
            report.failures.push_back({pending[i]->doc_id(), outcome.error});
        }
    }
    std::sort(report.failures.begin(), report.failures.end(),
              [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    return report;
}

}  // namespace corank
