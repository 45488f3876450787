#include "http_util.hpp"

#include <httplib.h>

#include <stdexcept>

namespace revsmell::detail {

HttpResponse http_request(const std::string& method, const std::string& url,
                          const std::map<std::string, std::string>& headers,
                          const std::string& body, const std::string& content_type,
                          std::chrono::milliseconds timeout) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::runtime_error("not an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers h(headers.begin(), headers.end());
    httplib::Result res = method == "POST" ? client.Post(path, h, body, content_type)
                                           : client.Get(path, h);
    if (!res) {
        throw std::runtime_error(method + " " + url + " failed: " + httplib::to_string(res.error()));
    }
    return HttpResponse{res->status, res->body};
}

} // namespace revsmell::detail
