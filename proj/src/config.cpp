#include "corank/config.hpp"

#include <cstdlib>
#include <set>

#include <fmt/format.h>

#include "corank/error.hpp"
#include "corank/fileio.hpp"

namespace corank {

using nlohmann::json;

BackendMode parse_backend_mode(std::string_view text)
{
    if (text == "mock") {
        return BackendMode::Mock;
    }
    if (text == "live") {
        return BackendMode::Live;
    }
    if (text == "record") {
        return BackendMode::Record;
    }
    if (text == "replay") {
        return BackendMode::Replay;
    }
    throw ConfigError(fmt::format("unknown backend mode '{}' (expected mock, live, record, replay)", text));
}

namespace {

std::string_view mode_name(BackendMode mode)
{
    switch (mode) {
    case BackendMode::Mock: return "mock";
    case BackendMode::Live: return "live";
    case BackendMode::Record: return "record";
    case BackendMode::Replay: return "replay";
    }
    return "mock";
}

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> known)
{
    if (!j.is_object()) {
        throw ConfigError(fmt::format("{} must be a JSON object", where));
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
        }
    }
}

void read_path(const json& j, const char* key, const std::filesystem::path& base, std::filesystem::path& out)
{
    std::string raw;
    read(j, key, raw);
    if (!raw.empty()) {
        std::filesystem::path p(raw);
        out = p.is_absolute() ? p : base / p;
    }
}

std::string api_key_from(const std::string& env)
{
    if (env.empty()) {
        return {};
    }
    const char* value = std::getenv(env.c_str());
    return value == nullptr ? std::string{} : std::string(value);
}

}  // namespace

void ExperimentConfig::validate() const
{
    if (retriever != "bm25" && retriever != "dense") {
        throw ConfigError(fmt::format("retriever must be bm25 or dense, got '{}'", retriever));
    }
    if (retrieve_m == 0) {
        throw ConfigError("retrieve_m must be positive");
    }
    if (strategies.empty()) {
        throw ConfigError("at least one strategy is required");
    }
    if (backend.parallelism == 0) {
        throw ConfigError("backend.parallelism must be positive");
    }
    if (backend.max_attempts < 1) {
        throw ConfigError("backend.max_attempts must be at least 1");
    }
    if (price_per_million < 0) {
        throw ConfigError("price_per_million must be non-negative");
    }
    if (embedder.kind != "hash" && embedder.kind != "http") {
        throw ConfigError(fmt::format("embedder.kind must be hash or http, got '{}'", embedder.kind));
    }
    if (embedder.kind == "hash" && embedder.dim == 0) {
        throw ConfigError("embedder.dim must be positive");
    }
    rerank.validate();
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir)
{
    reject_unknown(j, "config",
                   {"corpus_path", "queries_path", "qrels_path", "features_path", "output_dir", "retriever",
                    "retrieve_m", "bm25", "rerank", "strategies", "backend", "embedder", "price_per_million", "gain"});
    ExperimentConfig c;
    read_path(j, "corpus_path", base_dir, c.corpus_path);
    read_path(j, "queries_path", base_dir, c.queries_path);
    read_path(j, "qrels_path", base_dir, c.qrels_path);
    read_path(j, "features_path", base_dir, c.features_path);
    c.output_dir = base_dir / c.output_dir;
    read_path(j, "output_dir", base_dir, c.output_dir);
    read(j, "retriever", c.retriever);
    read(j, "retrieve_m", c.retrieve_m);
    read(j, "price_per_million", c.price_per_million);
    if (j.contains("gain")) {
        c.gain = parse_gain(j.at("gain").get<std::string>());
    }
    if (j.contains("bm25")) {
        const auto& b = j.at("bm25");
        reject_unknown(b, "bm25", {"k1", "b"});
        read(b, "k1", c.bm25.k1);
        read(b, "b", c.bm25.b);
    }
    if (j.contains("strategies")) {
        c.strategies.clear();
        for (const auto& s : j.at("strategies")) {
            c.strategies.push_back(parse_strategy(s.get<std::string>()));
        }
    }
    if (j.contains("rerank")) {
        const auto& r = j.at("rerank");
        reject_unknown(r, "rerank",
                       {"vanilla_m", "sliding_total", "window", "step", "coarse_m", "fine_k", "form", "k_keywords"});
        auto& rc = c.rerank;
        read(r, "vanilla_m", rc.vanilla_m);
        read(r, "sliding_total", rc.sliding_total);
        read(r, "window", rc.window);
        read(r, "step", rc.step);
        read(r, "coarse_m", rc.coarse_m);
        read(r, "fine_k", rc.fine_k);
        read(r, "k_keywords", rc.k_keywords);
        if (r.contains("form")) {
            const auto& f = r.at("form");
            rc.form = parse_form(f.is_number() ? std::to_string(f.get<int>()) : f.get<std::string>());
        }
    }
    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        reject_unknown(b, "backend",
                       {"mode", "upstream", "model", "extraction_model", "endpoint", "api_key_env", "cache_path",
                        "parallelism", "max_attempts", "initial_backoff_ms", "temperature", "seed",
                        "rerank_max_tokens", "extraction_max_tokens", "timeout_seconds"});
        auto& bs = c.backend;
        if (b.contains("mode")) {
            bs.mode = parse_backend_mode(b.at("mode").get<std::string>());
        }
        read(b, "upstream", bs.upstream);
        read(b, "model", bs.model);
        read(b, "extraction_model", bs.extraction_model);
        read(b, "endpoint", bs.endpoint);
        read(b, "api_key_env", bs.api_key_env);
        read_path(b, "cache_path", base_dir, bs.cache_path);
        read(b, "parallelism", bs.parallelism);
        read(b, "max_attempts", bs.max_attempts);
        read(b, "initial_backoff_ms", bs.initial_backoff_ms);
        read(b, "temperature", bs.temperature);
        read(b, "seed", bs.seed);
        read(b, "rerank_max_tokens", bs.rerank_max_tokens);
        read(b, "extraction_max_tokens", bs.extraction_max_tokens);
        read(b, "timeout_seconds", bs.timeout_seconds);
    }
    if (j.contains("embedder")) {
        const auto& e = j.at("embedder");
        reject_unknown(e, "embedder", {"kind", "dim", "seed", "endpoint", "model", "api_key_env", "cache_path"});
        auto& es = c.embedder;
        read(e, "kind", es.kind);
        read(e, "dim", es.dim);
        read(e, "seed", es.seed);
        read(e, "endpoint", es.endpoint);
        read(e, "model", es.model);
        read(e, "api_key_env", es.api_key_env);
        read_path(e, "cache_path", base_dir, es.cache_path);
    }
    if (c.features_path.empty() && !c.corpus_path.empty()) {
        c.features_path = c.corpus_path;
        c.features_path += ".features.jsonl";
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    require_exists(path, "config file");
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return config_from_json(j, std::filesystem::absolute(path).parent_path());
}

json config_to_json(const ExperimentConfig& c)
{
    json strategies = json::array();
    for (auto s : c.strategies) {
        strategies.push_back(std::string(strategy_tag(s)));
    }
    const auto& r = c.rerank;
    const auto& b = c.backend;
    const auto& e = c.embedder;
    return {{"corpus_path", c.corpus_path.string()},
            {"queries_path", c.queries_path.string()},
            {"qrels_path", c.qrels_path.string()},
            {"features_path", c.features_path.string()},
            {"output_dir", c.output_dir.string()},
            {"retriever", c.retriever},
            {"retrieve_m", c.retrieve_m},
            {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}}},
            {"strategies", strategies},
            {"rerank",
             {{"vanilla_m", r.vanilla_m},
              {"sliding_total", r.sliding_total},
              {"window", r.window},
              {"step", r.step},
              {"coarse_m", r.coarse_m},
              {"fine_k", r.fine_k},
              {"form", static_cast<int>(r.form)},
              {"k_keywords", r.k_keywords}}},
            {"backend",
             {{"mode", mode_name(b.mode)},
              {"upstream", b.upstream},
              {"model", b.model},
              {"extraction_model", b.extraction_model},
              {"endpoint", b.endpoint},
              {"api_key_env", b.api_key_env},
              {"cache_path", b.cache_path.string()},
              {"parallelism", b.parallelism},
              {"max_attempts", b.max_attempts},
              {"initial_backoff_ms", b.initial_backoff_ms},
              {"temperature", b.temperature},
              {"seed", b.seed},
              {"rerank_max_tokens", b.rerank_max_tokens},
              {"extraction_max_tokens", b.extraction_max_tokens},
              {"timeout_seconds", b.timeout_seconds}}},
            {"embedder",
             {{"kind", e.kind},
              {"dim", e.dim},
              {"seed", e.seed},
              {"endpoint", e.endpoint},
              {"model", e.model},
              {"api_key_env", e.api_key_env},
              {"cache_path", e.cache_path.string()}}},
            {"price_per_million", c.price_per_million},
            {"gain", c.gain == GainFunction::Linear ? "linear" : "exponential"}};
}

void require_exists(const std::filesystem::path& path, std::string_view what)
{
    if (path.empty()) {
        throw ConfigError(fmt::format("{} path is not set", what));
    }
    if (!std::filesystem::exists(path)) {
        throw ConfigError(fmt::format("{} not found: {}", what, path.string()));
    }
}

namespace {

std::shared_ptr<ChatBackend> make_http(const BackendSettings& s)
{
    if (s.endpoint.empty()) {
        throw ConfigError("backend.endpoint is required for HTTP backends");
    }
    auto http = std::make_shared<HttpChatBackend>(HttpBackendConfig{s.endpoint, api_key_from(s.api_key_env),
                                                                    s.timeout_seconds});
    return std::make_shared<RetryingBackend>(
        http, RetryPolicy{s.max_attempts, std::chrono::milliseconds(s.initial_backoff_ms), 2.0});
}

}  // namespace

std::shared_ptr<ChatBackend> make_backend(const BackendSettings& s)
{
    std::shared_ptr<ChatBackend> backend;
    switch (s.mode) {
    case BackendMode::Mock: {
        backend = std::make_shared<MockBackend>();
        if (!s.cache_path.empty()) {
            backend = std::make_shared<CachingBackend>(std::make_shared<ResponseCache>(s.cache_path), CacheMode::Record,
                                                       backend);
        }
        break;
    }
    case BackendMode::Live: backend = make_http(s); break;
    case BackendMode::Record: {
        if (s.cache_path.empty()) {
            throw ConfigError("record mode needs backend.cache_path");
        }
        if (s.upstream != "mock" && s.upstream != "http") {
            throw ConfigError(fmt::format("backend.upstream must be mock or http, got '{}'", s.upstream));
        }
        std::shared_ptr<ChatBackend> upstream =
            s.upstream == "mock" ? std::shared_ptr<ChatBackend>(std::make_shared<MockBackend>()) : make_http(s);
        backend = std::make_shared<CachingBackend>(std::make_shared<ResponseCache>(s.cache_path), CacheMode::Record,
                                                   upstream);
        break;
    }
    case BackendMode::Replay: {
        require_exists(s.cache_path, "replay cache");
        backend = std::make_shared<CachingBackend>(std::make_shared<ResponseCache>(s.cache_path), CacheMode::Replay);
        break;
    }
    }
    return std::make_shared<ConcurrencyLimitedBackend>(backend, s.parallelism);
}

std::shared_ptr<Embedder> make_embedder(const EmbedderSettings& s)
{
    std::shared_ptr<Embedder> inner;
    if (s.kind == "http") {
        if (s.endpoint.empty() || s.model.empty()) {
            throw ConfigError("http embedder needs embedder.endpoint and embedder.model");
        }
        inner = std::make_shared<HttpEmbedder>(HttpEmbedderConfig{s.endpoint, api_key_from(s.api_key_env), s.model});
    } else {
        inner = std::make_shared<HashEmbedder>(s.dim, s.seed);
    }
    return std::make_shared<CachingEmbedder>(inner, s.cache_path);
}

LlmCallOptions rerank_call_options(const BackendSettings& s)
{
    return LlmCallOptions{s.model, s.temperature, s.seed, s.rerank_max_tokens};
}

ExtractionOptions extraction_options(const BackendSettings& s)
{
    return ExtractionOptions{s.extraction_model.empty() ? s.model : s.extraction_model, s.temperature, s.seed,
                             s.extraction_max_tokens};
}

}  // namespace corank
