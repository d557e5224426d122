#pragma once

// Thin wrapper over cpp-httplib so only one translation unit pulls in the
// (large) header and the OpenSSL configuration.

#include "triage/commit.hpp"

#include <chrono>
#include <map>
#include <string>

namespace triage::http {

struct Options {
    std::chrono::milliseconds timeout{30000};
    std::map<std::string, std::string> headers;
};

/// `base_url` is scheme://host[:port]. Transport failures throw FetchError,
/// timeouts TransportTimeout.
ingest::HttpResponse get(const std::string& base_url, const std::string& path, const Options& options);
ingest::HttpResponse post(const std::string& base_url, const std::string& path, const std::string& body,
                          const std::string& content_type, const Options& options);

}  // namespace triage::http
