#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corank/corpus.hpp"
#include "corank/llm_backend.hpp"
#include "corank/prompts.hpp"
#include "corank/token_ledger.hpp"

namespace corank {

/// Broad -> specific -> title-like topic.
struct CategoryPath {
    std::array<std::string, 3> levels;

    [[nodiscard]] std::string joined() const;  // "A -> B -> C"
    bool operator==(const CategoryPath&) const = default;
};

struct FeatureSet {
    std::string doc_id;
    CategoryPath category;
    std::vector<std::string> sections;
    std::vector<std::string> keywords;
    std::vector<std::string> pseudo_queries;
    std::string extractor_model;

    /// Throws ExtractionError when a list is empty or an element is blank,
    /// untrimmed, or a case-insensitive duplicate.
    void validate() const;
    bool operator==(const FeatureSet&) const = default;
};

struct ExtractionOptions {
    std::string model = "mock";
    double temperature = 1.0;
    std::int64_t seed = 42;
    int max_output_tokens = 4096;
};

// Parsers are pure. Soft count bounds produce warnings; an empty result throws
// ExtractionError carrying the raw response.
CategoryPath parse_category(std::string_view response);
std::vector<std::string> parse_sections(std::string_view response, std::vector<std::string>* warnings = nullptr);
std::vector<std::string> parse_keywords(std::string_view response, std::vector<std::string>* warnings = nullptr);
std::vector<std::string> parse_pseudo_queries(std::string_view response, std::vector<std::string>* warnings = nullptr);

/// Case-insensitive dedup keeping the first occurrence and its casing; blanks dropped.
std::vector<std::string> dedup_case_insensitive(std::vector<std::string> items);

CategoryPath extract_category(const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                              TokenLedger* ledger = nullptr);
std::vector<std::string> extract_sections(const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                                          TokenLedger* ledger = nullptr, std::vector<std::string>* warnings = nullptr);
std::vector<std::string> extract_keywords(const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                                          TokenLedger* ledger = nullptr, std::vector<std::string>* warnings = nullptr);
std::vector<std::string> extract_pseudo_queries(const Document& doc, ChatBackend& backend,
                                                const ExtractionOptions& options, TokenLedger* ledger = nullptr,
                                                std::vector<std::string>* warnings = nullptr);

/// All four features for one document; the first failing feature aborts.
FeatureSet extract_features(const Document& doc, ChatBackend& backend, const ExtractionOptions& options,
                            TokenLedger* ledger = nullptr, std::vector<std::string>* warnings = nullptr);

/// Line-delimited sidecar of FeatureSets keyed by doc_id. Reads are concurrent;
/// `put` appends one line per call under an exclusive lock.
class FeatureStore {
  public:
    FeatureStore() = default;
    explicit FeatureStore(std::filesystem::path path);

    [[nodiscard]] bool contains(std::string_view doc_id) const;
    [[nodiscard]] const FeatureSet* find(std::string_view doc_id) const;
    [[nodiscard]] std::size_t size() const;
    void put(FeatureSet features);

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

  private:
    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    // node-based so pointers from find() stay valid across later puts
    std::unordered_map<std::string, FeatureSet> features_;
};

nlohmann::json feature_set_to_json(const FeatureSet& features);
FeatureSet feature_set_from_json(const nlohmann::json& j);

struct ExtractionFailure {
    std::string doc_id;
    std::string message;
};

struct ExtractionReport {
    std::size_t extracted = 0;
    std::size_t skipped = 0;
    std::vector<ExtractionFailure> failures;  // sorted by doc_id
    std::array<std::size_t, 4> feature_successes{};  // indexed by FeatureKind
    std::size_t warnings = 0;
    TokenLedger tokens;
};

/// Extracts features for every document not already in `store`, persisting each
/// completed document immediately. Per-document failures are collected, not thrown.
ExtractionReport extract_all(const Corpus& corpus, ChatBackend& backend, FeatureStore& store,
                             const ExtractionOptions& options, std::size_t parallelism);

}  // namespace corank
