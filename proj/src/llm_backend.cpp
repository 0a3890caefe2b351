#include "corank/llm_backend.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "corank/digest.hpp"
#include "corank/error.hpp"
#include "corank/fileio.hpp"
#include "corank/text.hpp"

namespace corank {

using nlohmann::json;

void ChatRequest::validate() const
{
    if (prompt.empty()) {
        throw Error("chat request with empty prompt");
    }
    if (!(temperature >= 0.0)) {
        throw Error("chat request temperature must be >= 0");
    }
}

std::string request_digest(const ChatRequest& request)
{
    const json canonical = {{"model", request.model_name},
                            {"prompt", request.prompt},
                            {"seed", request.seed},
                            {"temperature", request.temperature}};
    return sha256_hex(canonical.dump());
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path))
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
            const auto record = json::parse(lines[i]);
            ChatResponse response{record.at("text").get<std::string>(), record.at("prompt_tokens").get<std::int64_t>(),
                                  record.at("completion_tokens").get<std::int64_t>()};
            entries_.insert_or_assign(record.at("key").get<std::string>(), std::move(response));
        } catch (const json::exception& e) {
            throw FormatError(path_.string(), i + 1, std::string("bad cache entry: ") + e.what());
        }
    }
}

std::optional<ChatResponse> ResponseCache::find(const std::string& key) const
{
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ResponseCache::insert(const std::string& key, const ChatResponse& response)
{
    std::unique_lock lock(mutex_);
    if (entries_.contains(key)) {
        return;
    }
    entries_.emplace(key, response);
    if (path_.empty()) {
        return;
    }
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    const json record = {{"key", key},
                         {"text", response.text},
                         {"prompt_tokens", response.prompt_tokens},
                         {"completion_tokens", response.completion_tokens},
                         {"created_at", now}};
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) {
        throw Error("cannot append to response cache " + path_.string());
    }
    out << record.dump() << '\n';
}

std::size_t ResponseCache::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

CachingBackend::CachingBackend(std::shared_ptr<ResponseCache> cache, CacheMode mode,
                               std::shared_ptr<ChatBackend> upstream)
    : cache_(std::move(cache)), mode_(mode), upstream_(std::move(upstream))
{
    if (!cache_) {
        throw ConfigError("caching backend needs a cache");
    }
    if (mode_ == CacheMode::Record && !upstream_) {
        throw ConfigError("record mode needs an upstream backend");
    }
}

ChatResponse CachingBackend::complete(const ChatRequest& request)
{
    request.validate();
    const auto key = request_digest(request);
    if (auto hit = cache_->find(key)) {
        ++hits_;
        return *hit;
    }
    ++misses_;
    if (mode_ == CacheMode::Replay) {
        throw ReplayMissError(key);
    }
    auto response = upstream_->complete(request);
    cache_->insert(key, response);
    return response;
}

RetryingBackend::RetryingBackend(std::shared_ptr<ChatBackend> inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper))
{
    if (policy_.max_attempts < 1) {
        throw ConfigError("retry policy needs at least one attempt");
    }
    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

ChatResponse RetryingBackend::complete(const ChatRequest& request)
{
    auto backoff = policy_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return inner_->complete(request);
        } catch (const TransportError& e) {
            if (attempt >= policy_.max_attempts) {
                throw BackendError(std::string("transport failure: ") + e.what(), attempt);
            }
            spdlog::warn("attempt {} failed ({}); retrying in {} ms", attempt, e.what(), backoff.count());
            sleeper_(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<std::chrono::milliseconds::rep>(static_cast<double>(backoff.count()) * policy_.multiplier));
        }
    }
}

ConcurrencyLimitedBackend::ConcurrencyLimitedBackend(std::shared_ptr<ChatBackend> inner, std::size_t limit)
    : inner_(std::move(inner)), slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(limit, 1, 4096)))
{}

ChatResponse ConcurrencyLimitedBackend::complete(const ChatRequest& request)
{
    slots_.acquire();
    struct Release {
        ConcurrencyLimitedBackend* self;
        ~Release()
        {
            self->in_flight_.fetch_sub(1);
            self->slots_.release();
        }
    } release{this};
    const auto now = in_flight_.fetch_add(1) + 1;
    auto peak = peak_.load();
    while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
    }
    return inner_->complete(request);
}

}  // namespace corank
