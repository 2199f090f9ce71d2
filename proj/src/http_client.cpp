#include "http_client.hpp"

#include <httplib.h>

#include "panda/error.hpp"

namespace panda::detail {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResult post_json(const std::string& url, const std::string& body, const std::string& bearer_token,
                     std::chrono::milliseconds timeout) {
    const auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

    HttpResult out;
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
        out.transport_error = httplib::to_string(res.error());
        out.timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                        res.error() == httplib::Error::ConnectionTimeout;
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

}  // namespace panda::detail
