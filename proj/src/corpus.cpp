#include "corank/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "corank/error.hpp"
#include "corank/fileio.hpp"
#include "corank/text.hpp"
#include "corank/tokens.hpp"

namespace corank {

using nlohmann::json;

Document::Document(std::string doc_id, std::string title, std::string text)
    : doc_id_(std::move(doc_id)), title_(std::move(title)), text_(std::move(text))
{}

Document::Document(const Document& other)
    : doc_id_(other.doc_id_), title_(other.title_), text_(other.text_),
      token_estimate_(other.token_estimate_.load(std::memory_order_relaxed))
{}

Document& Document::operator=(const Document& other)
{
    if (this != &other) {
        doc_id_ = other.doc_id_;
        title_ = other.title_;
        text_ = other.text_;
        token_estimate_.store(other.token_estimate_.load(std::memory_order_relaxed), std::memory_order_relaxed);
    }
    return *this;
}

Document::Document(Document&& other) noexcept
    : doc_id_(std::move(other.doc_id_)), title_(std::move(other.title_)), text_(std::move(other.text_)),
      token_estimate_(other.token_estimate_.load(std::memory_order_relaxed))
{}

Document& Document::operator=(Document&& other) noexcept
{
    doc_id_ = std::move(other.doc_id_);
    title_ = std::move(other.title_);
    text_ = std::move(other.text_);
    token_estimate_.store(other.token_estimate_.load(std::memory_order_relaxed), std::memory_order_relaxed);
    return *this;
}

void Document::set_text(std::string text)
{
    text_ = std::move(text);
    token_estimate_.store(-1, std::memory_order_relaxed);
}

std::size_t Document::token_estimate() const
{
    auto cached = token_estimate_.load(std::memory_order_relaxed);
    if (cached < 0) {
        cached = static_cast<std::int64_t>(count_tokens(text_));
        token_estimate_.store(cached, std::memory_order_relaxed);
    }
    return static_cast<std::size_t>(cached);
}

void Corpus::add(Document doc)
{
    if (doc.doc_id().empty()) {
        throw Error("document with empty doc_id");
    }
    auto [it, inserted] = by_id_.emplace(doc.doc_id(), docs_.size());
    if (!inserted) {
        throw Error("duplicate doc_id \"" + doc.doc_id() + "\"");
    }
    docs_.push_back(std::move(doc));
}

const Document* Corpus::find(std::string_view doc_id) const
{
    auto it = by_id_.find(std::string(doc_id));
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const Document& Corpus::at(std::string_view doc_id) const
{
    if (const auto* doc = find(doc_id)) {
        return *doc;
    }
    throw Error("unknown doc_id \"" + std::string(doc_id) + "\"");
}

std::optional<std::size_t> Corpus::index_of(std::string_view doc_id) const
{
    auto it = by_id_.find(std::string(doc_id));
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool Qrels::set(const std::string& query_id, const std::string& doc_id, int grade)
{
    if (grade < 0) {
        throw Error("negative relevance grade for (" + query_id + ", " + doc_id + ")");
    }
    auto& grades = judgments_[query_id];
    auto [it, inserted] = grades.insert_or_assign(doc_id, grade);
    return !inserted;
}

bool Qrels::contains(std::string_view query_id) const { return judgments_.find(query_id) != judgments_.end(); }

const Qrels::Grades& Qrels::grades(std::string_view query_id) const
{
    static const Grades empty;
    auto it = judgments_.find(query_id);
    return it == judgments_.end() ? empty : it->second;
}

std::optional<int> Qrels::grade(std::string_view query_id, std::string_view doc_id) const
{
    const auto& g = grades(query_id);
    auto it = g.find(std::string(doc_id));
    if (it == g.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Qrels::size() const noexcept
{
    std::size_t n = 0;
    for (const auto& [q, g] : judgments_) {
        n += g.size();
    }
    return n;
}

std::vector<std::string> CandidateList::doc_ids() const
{
    std::vector<std::string> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) {
        ids.push_back(e.doc_id);
    }
    return ids;
}

namespace {

bool candidate_before(const Candidate& a, const Candidate& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id < b.doc_id;
}

}  // namespace

CandidateList make_candidate_list(std::string query_id, std::vector<Candidate> entries)
{
    std::sort(entries.begin(), entries.end(), candidate_before);
    std::unordered_set<std::string> seen;
    for (const auto& e : entries) {
        if (!seen.insert(e.doc_id).second) {
            throw Error("duplicate doc_id \"" + e.doc_id + "\" in candidate list for query " + query_id);
        }
    }
    return CandidateList{std::move(query_id), std::move(entries)};
}

bool is_canonical(const CandidateList& list)
{
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
        if (!seen.insert(list.entries[i].doc_id).second) {
            return false;
        }
        if (i > 0 && candidate_before(list.entries[i], list.entries[i - 1])) {
            return false;
        }
    }
    return true;
}

Corpus load_corpus(const std::filesystem::path& path)
{
    const auto source = path.string();
    const auto lines = read_lines(path);
    Corpus corpus;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line_no = i + 1;
        if (trim_view(lines[i]).empty()) {
            continue;
        }
        json record;
        try {
            record = json::parse(lines[i]);
        } catch (const json::parse_error& e) {
            throw FormatError(source, line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!record.is_object()) {
            throw FormatError(source, line_no, "record is not an object");
        }
        for (const char* field : {"doc_id", "title", "text"}) {
            if (!record.contains(field) || !record.at(field).is_string()) {
                throw FormatError(source, line_no, std::string("missing string field \"") + field + "\"");
            }
        }
        auto doc_id = record.at("doc_id").get<std::string>();
        if (doc_id.empty()) {
            throw FormatError(source, line_no, "empty doc_id");
        }
        if (corpus.find(doc_id) != nullptr) {
            throw FormatError(source, line_no, "duplicate doc_id \"" + doc_id + "\"");
        }
        corpus.add(Document(std::move(doc_id), record.at("title").get<std::string>(),
                            record.at("text").get<std::string>()));
    }
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path)
{
    std::string out;
    for (const auto& doc : corpus) {
        out += json{{"doc_id", doc.doc_id()}, {"title", doc.title()}, {"text", doc.text()}}.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::vector<Query> load_queries(const std::filesystem::path& path)
{
    const auto source = path.string();
    const auto lines = read_lines(path);
    std::vector<Query> queries;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line_no = i + 1;
        auto body = trim_view(lines[i]);
        if (body.empty()) {
            continue;
        }
        Query q;
        if (body.front() == '{') {
            json record;
            try {
                record = json::parse(body);
            } catch (const json::parse_error& e) {
                throw FormatError(source, line_no, std::string("malformed JSON: ") + e.what());
            }
            const char* id_key = record.contains("query_id") ? "query_id" : "qid";
            if (!record.contains(id_key) || !record.at(id_key).is_string() || !record.contains("text")
                || !record.at("text").is_string()) {
                throw FormatError(source, line_no, "query record needs string fields query_id and text");
            }
            q.query_id = record.at(id_key).get<std::string>();
            q.text = record.at("text").get<std::string>();
        } else {
            auto tab = body.find('\t');
            if (tab == std::string_view::npos) {
                throw FormatError(source, line_no, "expected query_id<TAB>text");
            }
            q.query_id = trim(body.substr(0, tab));
            q.text = trim(body.substr(tab + 1));
        }
        if (q.query_id.empty() || trim_view(q.text).empty()) {
            throw FormatError(source, line_no, "empty query_id or query text");
        }
        if (!seen.insert(q.query_id).second) {
            throw FormatError(source, line_no, "duplicate query_id \"" + q.query_id + "\"");
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

void write_queries(std::span<const Query> queries, const std::filesystem::path& path)
{
    std::string out;
    for (const auto& q : queries) {
        out += json{{"query_id", q.query_id}, {"text", q.text}}.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

namespace {

std::optional<long long> parse_integer(std::string_view s)
{
    long long value = 0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last) {
        return std::nullopt;
    }
    return value;
}

}  // namespace

Qrels load_qrels(const std::filesystem::path& path, std::vector<std::string>* warnings)
{
    const auto source = path.string();
    const auto lines = read_lines(path);
    Qrels qrels;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line_no = i + 1;
        auto fields = split_whitespace(lines[i]);
        if (fields.empty()) {
            continue;
        }
        if (fields.size() != 4) {
            throw FormatError(source, line_no, "expected `query_id 0 doc_id grade`");
        }
        auto grade = parse_integer(fields[3]);
        if (!grade) {
            throw FormatError(source, line_no, "non-integer grade \"" + fields[3] + "\"");
        }
        if (*grade < 0) {
            throw FormatError(source, line_no, "negative grade " + fields[3]);
        }
        if (*grade > std::numeric_limits<int>::max()) {
            throw FormatError(source, line_no, "grade out of range");
        }
        if (qrels.set(fields[0], fields[2], static_cast<int>(*grade))) {
            auto msg = fmt::format("{}:{}: duplicate judgment ({}, {}) overrides earlier grade", source, line_no,
                                   fields[0], fields[2]);
            spdlog::warn("{}", msg);
            if (warnings != nullptr) {
                warnings->push_back(std::move(msg));
            }
        }
    }
    return qrels;
}

void write_qrels(const Qrels& qrels, const std::filesystem::path& path)
{
    std::string out;
    for (const auto& [qid, grades] : qrels.all()) {
        std::vector<std::pair<std::string, int>> sorted(grades.begin(), grades.end());
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [doc, grade] : sorted) {
            out += fmt::format("{} 0 {} {}\n", qid, doc, grade);
        }
    }
    write_file_atomic(path, out);
}

std::filesystem::path ledger_sidecar_path(const std::filesystem::path& run_path)
{
    auto p = run_path;
    p += ".tokens.json";
    return p;
}

void write_run(std::span<const RunResult> runs, const std::filesystem::path& path)
{
    std::string out;
    json ledgers = json::object();
    std::unordered_set<std::string> seen_queries;
    for (const auto& run : runs) {
        if (!seen_queries.insert(run.query_id).second) {
            throw Error("run contains query " + run.query_id + " twice");
        }
        if (run.strategy_tag.empty() || run.strategy_tag.find_first_of(" \t\n") != std::string::npos) {
            throw Error("run tag must be a non-empty single token");
        }
        std::unordered_set<std::string> seen_docs;
        const auto n = run.ranking.size();
        for (std::size_t r = 0; r < n; ++r) {
            if (!seen_docs.insert(run.ranking[r]).second) {
                throw Error("ranking for query " + run.query_id + " repeats " + run.ranking[r]);
            }
            out += fmt::format("{} Q0 {} {} {} {}\n", run.query_id, run.ranking[r], r + 1, n - r, run.strategy_tag);
        }
        ledgers[run.query_id] = run.token_usage.to_json();
    }
    write_file_atomic(path, out);
    write_file_atomic(ledger_sidecar_path(path), ledgers.dump(2) + "\n");
}

std::vector<RunResult> load_run(const std::filesystem::path& path)
{
    const auto source = path.string();
    const auto lines = read_lines(path);

    struct Pending {
        RunResult run;
        std::vector<std::pair<long long, std::string>> ranked;
        std::size_t first_line = 0;
    };
    std::vector<Pending> pending;
    std::unordered_map<std::string, std::size_t> slot;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line_no = i + 1;
        auto fields = split_whitespace(lines[i]);
        if (fields.empty()) {
            continue;
        }
        if (fields.size() != 6) {
            throw FormatError(source, line_no, "expected `query_id Q0 doc_id rank score tag`");
        }
        auto rank = parse_integer(fields[3]);
        if (!rank || *rank < 1) {
            throw FormatError(source, line_no, "rank must be a positive integer");
        }
        try {
            (void)std::stod(fields[4]);
        } catch (const std::exception&) {
            throw FormatError(source, line_no, "score is not a number");
        }
        auto [it, inserted] = slot.emplace(fields[0], pending.size());
        if (inserted) {
            Pending p;
            p.run.query_id = fields[0];
            p.run.strategy_tag = fields[5];
            p.first_line = line_no;
            pending.push_back(std::move(p));
        }
        auto& p = pending[it->second];
        if (p.run.strategy_tag != fields[5]) {
            throw FormatError(source, line_no, "mixed run tags within query " + fields[0]);
        }
        p.ranked.emplace_back(*rank, fields[2]);
    }

    std::vector<RunResult> runs;
    runs.reserve(pending.size());
    for (auto& p : pending) {
        std::stable_sort(p.ranked.begin(), p.ranked.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::unordered_set<std::string> seen;
        for (std::size_t r = 0; r < p.ranked.size(); ++r) {
            if (p.ranked[r].first != static_cast<long long>(r + 1)) {
                throw FormatError(source, p.first_line,
                                  fmt::format("query {} has a rank gap or duplicate near rank {}", p.run.query_id,
                                              r + 1));
            }
            if (!seen.insert(p.ranked[r].second).second) {
                throw FormatError(source, p.first_line,
                                  "query " + p.run.query_id + " ranks " + p.ranked[r].second + " twice");
            }
            p.run.ranking.push_back(std::move(p.ranked[r].second));
        }
        runs.push_back(std::move(p.run));
    }

    const auto sidecar = ledger_sidecar_path(path);
    if (std::filesystem::exists(sidecar)) {
        json ledgers;
        try {
            ledgers = json::parse(read_file(sidecar));
        } catch (const json::parse_error& e) {
            throw FormatError(sidecar.string(), 1, std::string("malformed JSON: ") + e.what());
        }
        for (auto& run : runs) {
            if (ledgers.contains(run.query_id)) {
                run.token_usage = TokenLedger::from_json(ledgers.at(run.query_id));
            }
        }
    }
    return runs;
}

}  // namespace corank
