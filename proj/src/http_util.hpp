#pragma once

#include <string>

namespace corank::detail {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

struct HttpReply {
    int status = 0;
    std::string body;
};

ParsedUrl parse_url(const std::string& url);

/// Throws TransportError when no HTTP response was received.
HttpReply post_json(const std::string& url, const std::string& body, const std::string& bearer, double timeout_s);

}  // namespace corank::detail
