#pragma once

#include "revsmell/annotation.hpp"
#include "revsmell/error.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>

namespace revsmell::annotation {

/// Static bearer tokens per annotator or arbiter id. An empty policy
/// leaves the API open (local use and tests).
struct AuthPolicy {
    std::map<std::string, std::string> tokens;

    /// Reads REVSMELL_TOKEN_<ID> for every id (upper-cased, non-alphanumerics
    /// mapped to '_'). Ids without a variable get no token.
    static AuthPolicy from_env(const std::vector<std::string>& ids,
                               const std::function<std::optional<std::string>(const std::string&)>& env);
    static std::string env_name(std::string_view id);

    bool open() const noexcept { return tokens.empty(); }
    bool allows(std::string_view id, std::string_view token) const;
    bool any(std::string_view token) const;
};

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    std::string bearer_token;
};

struct ApiResponse {
    int status = 200;
    std::string body;  // UTF-8 JSON
};

/// Transport-independent router for the annotation HTTP API. Errors come
/// back as {"code", "message"} with a matching status.
class AnnotationApi {
public:
    AnnotationApi(AnnotationService& service, AuthPolicy auth)
        : service_(service), auth_(std::move(auth)) {}

    ApiResponse handle(const ApiRequest& request);

private:
    ApiResponse dispatch(const ApiRequest& request);

    AnnotationService& service_;
    AuthPolicy auth_;
};

int http_status(Errc code) noexcept;

/// Serves an AnnotationApi over HTTP on a background thread.
class ApiServer {
public:
    explicit ApiServer(AnnotationApi& api);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds and starts serving; port 0 picks a free port. Returns the bound port.
    int start(const std::string& host, int port);
    /// Serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
};

} // namespace revsmell::annotation
