#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "corank/embedding.hpp"
#include "corank/eval.hpp"
#include "corank/kernels.hpp"
#include "corank/llm_backend.hpp"
#include "corank/rerank.hpp"

namespace corank {

enum class BackendMode {
    Mock,    // deterministic offline backend, optionally recorded to the cache
    Live,    // HTTP only
    Record,  // cache in front of the upstream; misses are forwarded and stored
    Replay,  // cache only; a miss is an error
};

BackendMode parse_backend_mode(std::string_view text);

struct BackendSettings {
    BackendMode mode = BackendMode::Mock;
    std::string upstream = "mock";  // for record mode: mock | http
    std::string model = "mock";
    std::string extraction_model;  // empty: same as model
    std::string endpoint;
    std::string api_key_env = "CORANK_API_KEY";
    std::filesystem::path cache_path;
    std::size_t parallelism = 8;
    int max_attempts = 3;
    std::int64_t initial_backoff_ms = 1000;
    double temperature = 1.0;
    std::int64_t seed = 42;
    int rerank_max_tokens = 2048;
    int extraction_max_tokens = 4096;
    double timeout_seconds = 120.0;
};

struct EmbedderSettings {
    std::string kind = "hash";  // hash | http
    std::size_t dim = 256;
    std::uint64_t seed = 42;
    std::string endpoint;
    std::string model;
    std::string api_key_env = "CORANK_API_KEY";
    std::filesystem::path cache_path;
};

struct ExperimentConfig {
    std::filesystem::path corpus_path;
    std::filesystem::path queries_path;
    std::filesystem::path qrels_path;
    std::filesystem::path features_path;  // default: <corpus_path>.features.jsonl
    std::filesystem::path output_dir = "runs";
    std::string retriever = "bm25";       // bm25 | dense
    std::size_t retrieve_m = 200;
    Bm25Params bm25;
    RerankConfig rerank;
    std::vector<Strategy> strategies{Strategy::CoRank};
    BackendSettings backend;
    EmbedderSettings embedder;
    double price_per_million = 0.4;
    GainFunction gain = GainFunction::Linear;

    /// Throws ConfigError on inconsistent values.
    void validate() const;
};

/// Relative paths are resolved against `base_dir`. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Throws ConfigError naming the first missing path.
void require_exists(const std::filesystem::path& path, std::string_view what);

/// Chat backend stack for the configured mode. Replay requires the cache file.
std::shared_ptr<ChatBackend> make_backend(const BackendSettings& settings);
/// Embedder wrapped in an in-memory (or file-backed) cache.
std::shared_ptr<Embedder> make_embedder(const EmbedderSettings& settings);

LlmCallOptions rerank_call_options(const BackendSettings& settings);
ExtractionOptions extraction_options(const BackendSettings& settings);

}  // namespace corank
