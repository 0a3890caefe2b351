#include <httplib.h>
#include <json.hpp>

#include "corank/error.hpp"
#include "corank/llm_backend.hpp"
#include "corank/tokens.hpp"
#include "http_util.hpp"

namespace corank {

using nlohmann::json;

namespace detail {

ParsedUrl parse_url(const std::string& url)
{
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must include a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    parsed.origin = url.substr(0, path_start);
    parsed.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    return parsed;
}

HttpReply post_json(const std::string& url, const std::string& body, const std::string& bearer, double timeout_s)
{
    const auto target = parse_url(url);
    httplib::Client client(target.origin);
    const auto seconds = static_cast<time_t>(timeout_s);
    const auto micros = static_cast<time_t>((timeout_s - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers headers;
    if (!bearer.empty()) {
        headers.emplace("Authorization", "Bearer " + bearer);
    }
    auto result = client.Post(target.path, headers, body, "application/json");
    if (!result) {
        throw TransportError("POST " + url + " failed: " + httplib::to_string(result.error()));
    }
    return HttpReply{result->status, result->body};
}

}  // namespace detail

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config))
{
    (void)detail::parse_url(config_.endpoint);
}

ChatResponse HttpChatBackend::complete(const ChatRequest& request)
{
    request.validate();
    const json body = {{"model", request.model_name},
                       {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                       {"temperature", request.temperature},
                       {"seed", request.seed},
                       {"max_tokens", request.max_output_tokens}};
    const auto reply = detail::post_json(config_.endpoint, body.dump(), config_.api_key, config_.timeout_seconds);
    if (reply.status == 429 || reply.status >= 500) {
        throw TransportError("HTTP " + std::to_string(reply.status) + " from " + config_.endpoint);
    }
    if (reply.status != 200) {
        throw BackendError("HTTP " + std::to_string(reply.status) + " from " + config_.endpoint + ": " + reply.body);
    }
    try {
        const auto j = json::parse(reply.body);
        ChatResponse response;
        response.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            response.prompt_tokens = j.at("usage").value("prompt_tokens", std::int64_t{0});
            response.completion_tokens = j.at("usage").value("completion_tokens", std::int64_t{0});
        } else {
            response.prompt_tokens = static_cast<std::int64_t>(count_tokens(request.prompt));
            response.completion_tokens = static_cast<std::int64_t>(count_tokens(response.text));
        }
        return response;
    } catch (const json::exception& e) {
        throw BackendError(std::string("malformed chat-completions response: ") + e.what());
    }
}

}  // namespace corank
