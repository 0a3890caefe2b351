#include "corank/embedding.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "corank/digest.hpp"
#include "corank/error.hpp"
#include "corank/fileio.hpp"
#include "corank/kernels.hpp"
#include "corank/text.hpp"
#include "http_util.hpp"

namespace corank {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed)
{
    if (dim_ == 0) {
        throw ConfigError("hash embedder dimension must be positive");
    }
}

EmbeddingVector HashEmbedder::embed(std::string_view text)
{
    const auto trimmed = trim_view(text);
    if (trimmed.empty()) {
        throw EmbeddingError("cannot embed blank text");
    }
    EmbeddingVector v{std::vector<float>(dim_, 0.0f)};
    auto add = [&](std::string_view token) {
        const auto h = splitmix64(fnv1a(token) ^ seed_);
        v.values[h % dim_] += ((h >> 32) & 1U) != 0U ? 1.0f : -1.0f;
    };
    for (const auto& token : word_tokens(trimmed)) {
        add(token);
    }
    // Punctuation-only text, or tokens that cancel out, still needs a direction.
    if (kernels::norm(v.values) == 0.0) {
        add(trimmed);
    }
    return v;
}

std::string HashEmbedder::id() const { return fmt::format("hash-{}-{}", dim_, seed_); }

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config))
{
    (void)detail::parse_url(config_.endpoint);
}

EmbeddingVector HttpEmbedder::embed(std::string_view text)
{
    if (trim_view(text).empty()) {
        throw EmbeddingError("cannot embed blank text");
    }
    const json body = {{"model", config_.model}, {"input", std::string(text)}};
    detail::HttpReply reply;
    try {
        reply = detail::post_json(config_.endpoint, body.dump(), config_.api_key, config_.timeout_seconds);
    } catch (const Error& e) {
        throw EmbeddingError(e.what());
    }
    if (reply.status != 200) {
        throw EmbeddingError(fmt::format("HTTP {} from {}: {}", reply.status, config_.endpoint, reply.body));
    }
    try {
        const auto j = json::parse(reply.body);
        EmbeddingVector v{j.at("data").at(0).at("embedding").get<std::vector<float>>()};
        if (v.values.empty()) {
            throw EmbeddingError("empty embedding from " + config_.endpoint);
        }
        return v;
    } catch (const json::exception& e) {
        throw EmbeddingError(std::string("malformed embeddings response: ") + e.what());
    }
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<Embedder> inner, std::filesystem::path path)
    : inner_(std::move(inner)), path_(std::move(path))
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
            const auto j = json::parse(lines[i]);
            entries_.insert_or_assign(j.at("key").get<std::string>(),
                                      EmbeddingVector{j.at("values").get<std::vector<float>>()});
        } catch (const json::exception& e) {
            throw FormatError(path_.string(), i + 1, e.what());
        }
    }
}

EmbeddingVector CachingEmbedder::embed(std::string_view text)
{
    const auto key = inner_->id() + ":" + sha256_hex(text);
    {
        std::shared_lock lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) {
            return it->second;
        }
    }
    auto v = inner_->embed(text);
    ++misses_;
    std::unique_lock lock(mutex_);
    auto [it, inserted] = entries_.emplace(key, v);
    if (inserted && !path_.empty()) {
        if (path_.has_parent_path()) {
            std::filesystem::create_directories(path_.parent_path());
        }
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        out << json{{"key", key}, {"values", v.values}}.dump() << '\n';
    }
    return it->second;
}

std::size_t CachingEmbedder::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b)
{
    if (a.dim() != b.dim()) {
        throw EmbeddingError(fmt::format("dimension mismatch: {} vs {}", a.dim(), b.dim()));
    }
    const double na = kernels::norm(a.values);
    const double nb = kernels::norm(b.values);
    if (na == 0.0 || nb == 0.0) {
        throw EmbeddingError("cosine of a zero vector");
    }
    return std::clamp(kernels::dot(a.values, b.values) / (na * nb), -1.0, 1.0);
}

std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, std::size_t k)
{
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return scores[x] > scores[y]; });
    order.resize(std::min(k, order.size()));
    return order;
}

namespace {

std::vector<double> score_all(const EmbeddingVector& query, const std::vector<std::string>& items, Embedder& embedder)
{
    std::vector<double> scores;
    scores.reserve(items.size());
    for (const auto& item : items) {
        scores.push_back(cosine(query, embedder.embed(item)));
    }
    return scores;
}

}  // namespace

SelectedFeatures adaptive_select(const EmbeddingVector& query, const FeatureSet& features, std::size_t k_keywords,
                                 Embedder& embedder)
{
    SelectedFeatures selected;
    const auto kw_scores = score_all(query, features.keywords, embedder);
    for (auto i : top_k_indices(kw_scores, k_keywords)) {
        selected.keywords.push_back(features.keywords[i]);
        selected.keyword_scores.push_back(kw_scores[i]);
    }
    if (!features.sections.empty()) {
        const auto scores = score_all(query, features.sections, embedder);
        const auto best = top_k_indices(scores, 1).front();
        selected.section = features.sections[best];
        selected.section_score = scores[best];
    }
    if (!features.pseudo_queries.empty()) {
        const auto scores = score_all(query, features.pseudo_queries, embedder);
        const auto best = top_k_indices(scores, 1).front();
        selected.pseudo_query = features.pseudo_queries[best];
        selected.pseudo_query_score = scores[best];
    }
    return selected;
}

SelectedFeatures adaptive_select(std::string_view query, const FeatureSet& features, std::size_t k_keywords,
                                 Embedder& embedder)
{
    return adaptive_select(embedder.embed(query), features, k_keywords, embedder);
}

}  // namespace corank
