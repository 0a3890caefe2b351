#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "corank/token_ledger.hpp"

namespace corank {

/// A corpus item. `text` is the full content handed to full-text reranking.
class Document {
  public:
    Document() = default;
    Document(std::string doc_id, std::string title, std::string text);
    Document(const Document& other);
    Document& operator=(const Document& other);
    Document(Document&&) noexcept;
    Document& operator=(Document&&) noexcept;

    [[nodiscard]] const std::string& doc_id() const noexcept { return doc_id_; }
    [[nodiscard]] const std::string& title() const noexcept { return title_; }
    [[nodiscard]] const std::string& text() const noexcept { return text_; }

    void set_text(std::string text);

    /// Default-heuristic token count of `text`, computed on first use.
    [[nodiscard]] std::size_t token_estimate() const;

  private:
    std::string doc_id_;
    std::string title_;
    std::string text_;
    mutable std::atomic<std::int64_t> token_estimate_{-1};
};

class Corpus {
  public:
    /// Throws on an empty or duplicate doc_id.
    void add(Document doc);

    [[nodiscard]] std::size_t size() const noexcept { return docs_.size(); }
    [[nodiscard]] bool empty() const noexcept { return docs_.empty(); }
    [[nodiscard]] const Document& operator[](std::size_t i) const { return docs_[i]; }
    [[nodiscard]] const Document* find(std::string_view doc_id) const;
    [[nodiscard]] const Document& at(std::string_view doc_id) const;
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view doc_id) const;

    [[nodiscard]] auto begin() const noexcept { return docs_.begin(); }
    [[nodiscard]] auto end() const noexcept { return docs_.end(); }

  private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

struct Query {
    std::string query_id;
    std::string text;
};

/// Relevance judgments: query_id -> doc_id -> grade (>= 0).
class Qrels {
  public:
    using Grades = std::unordered_map<std::string, int>;

    /// Returns true when an existing judgment was overwritten.
    bool set(const std::string& query_id, const std::string& doc_id, int grade);

    [[nodiscard]] bool contains(std::string_view query_id) const;
    /// Judgments for one query; empty when the query is unknown.
    [[nodiscard]] const Grades& grades(std::string_view query_id) const;
    [[nodiscard]] std::optional<int> grade(std::string_view query_id, std::string_view doc_id) const;
    [[nodiscard]] const std::map<std::string, Grades, std::less<>>& all() const noexcept { return judgments_; }
    [[nodiscard]] std::size_t size() const noexcept;

  private:
    std::map<std::string, Grades, std::less<>> judgments_;
};

struct Candidate {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const Candidate&) const = default;
};

/// First-stage output for one query: score descending, ties by doc_id ascending, no duplicates.
struct CandidateList {
    std::string query_id;
    std::vector<Candidate> entries;

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
    [[nodiscard]] std::vector<std::string> doc_ids() const;
};

/// Sorts into canonical order; throws on a duplicate doc_id.
CandidateList make_candidate_list(std::string query_id, std::vector<Candidate> entries);
[[nodiscard]] bool is_canonical(const CandidateList& list);

struct RunResult {
    std::string query_id;
    std::vector<std::string> ranking;
    std::string strategy_tag;
    TokenLedger token_usage;

    bool operator==(const RunResult&) const = default;
};

/// Line-delimited JSON records with doc_id, title and text.
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// JSON lines {"query_id", "text"} or tab-separated `query_id<TAB>text`.
std::vector<Query> load_queries(const std::filesystem::path& path);
void write_queries(std::span<const Query> queries, const std::filesystem::path& path);

/// `query_id 0 doc_id grade`. Later duplicates override earlier ones; each
/// override is reported through `warnings` (when given) and the log.
Qrels load_qrels(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

/// `query_id Q0 doc_id rank score tag`, ranks from 1. Token ledgers go to a
/// `<path>.tokens.json` sidecar so load_run(write_run(x)) == x.
void write_run(std::span<const RunResult> runs, const std::filesystem::path& path);
std::vector<RunResult> load_run(const std::filesystem::path& path);
std::filesystem::path ledger_sidecar_path(const std::filesystem::path& run_path);

}  // namespace corank
