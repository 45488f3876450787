#pragma once

#include <chrono>
#include <map>
#include <string>

namespace revsmell::detail {

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Blocking request against an absolute http(s) URL. Transport failures throw
/// std::runtime_error; HTTP status codes are returned as-is.
HttpResponse http_request(const std::string& method, const std::string& url,
                          const std::map<std::string, std::string>& headers,
                          const std::string& body, const std::string& content_type,
                          std::chrono::milliseconds timeout);

} // namespace revsmell::detail
