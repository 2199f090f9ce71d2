#pragma once

#include <chrono>
#include <string>

namespace panda::detail {

struct HttpResult {
    int status = 0;  ///< 0 when no HTTP response was received
    std::string body;
    std::string transport_error;
    bool timed_out = false;

    [[nodiscard]] bool ok() const noexcept { return status >= 200 && status < 300; }
};

/// POSTs a JSON body to an http:// or https:// URL with an optional bearer
/// token. Never throws for transport failures; they come back in the result.
HttpResult post_json(const std::string& url, const std::string& body, const std::string& bearer_token,
                     std::chrono::milliseconds timeout);

}  // namespace panda::detail
