#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corank/extraction.hpp"

namespace corank {

struct EmbeddingVector {
    std::vector<float> values;

    [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

class Embedder {
  public:
    virtual ~Embedder() = default;
    /// Throws EmbeddingError on blank text or backend failure.
    virtual EmbeddingVector embed(std::string_view text) = 0;
    /// Stable identity used as part of cache keys.
    [[nodiscard]] virtual std::string id() const = 0;
};

/// Signed feature hashing of lowercase word tokens into `dim` buckets.
class HashEmbedder final : public Embedder {
  public:
    explicit HashEmbedder(std::size_t dim = 256, std::uint64_t seed = 42);

    EmbeddingVector embed(std::string_view text) override;
    [[nodiscard]] std::string id() const override;
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

  private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct HttpEmbedderConfig {
    /// Full embeddings URL, e.g. https://api.openai.com/v1/embeddings
    std::string endpoint;
    std::string api_key;
    std::string model;
    double timeout_seconds = 60.0;
};

/// OpenAI-style embeddings client.
class HttpEmbedder final : public Embedder {
  public:
    explicit HttpEmbedder(HttpEmbedderConfig config);

    EmbeddingVector embed(std::string_view text) override;
    [[nodiscard]] std::string id() const override { return "http:" + config_.model; }

  private:
    HttpEmbedderConfig config_;
};

/// Memoizes another embedder by (embedder id, SHA-256 of text). With a path,
/// entries are loaded at construction and new ones appended as JSON lines.
class CachingEmbedder final : public Embedder {
  public:
    explicit CachingEmbedder(std::shared_ptr<Embedder> inner, std::filesystem::path path = {});

    EmbeddingVector embed(std::string_view text) override;
    [[nodiscard]] std::string id() const override { return inner_->id(); }

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::size_t misses() const noexcept { return misses_.load(); }

  private:
    std::shared_ptr<Embedder> inner_;
    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> entries_;
    std::atomic<std::size_t> misses_{0};
};

/// Throws EmbeddingError on dimension mismatch or a zero vector. Result is
/// clamped to [-1, 1].
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct SelectedFeatures {
    std::vector<std::string> keywords;  // similarity descending
    std::vector<double> keyword_scores;
    std::string section;
    double section_score = 0.0;
    std::string pseudo_query;
    double pseudo_query_score = 0.0;

    bool operator==(const SelectedFeatures&) const = default;
};

/// Indices of `scores` ordered by score descending, ties by index; at most k.
std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, std::size_t k);

/// Top-k keywords, best section and best pseudo query by cosine similarity to
/// the query embedding. Ties keep extraction order.
SelectedFeatures adaptive_select(const EmbeddingVector& query, const FeatureSet& features, std::size_t k_keywords,
                                 Embedder& embedder);
SelectedFeatures adaptive_select(std::string_view query, const FeatureSet& features, std::size_t k_keywords,
                                 Embedder& embedder);

}  // namespace corank
