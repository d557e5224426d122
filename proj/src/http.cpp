#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "http.hpp"

#include "triage/error.hpp"
#include "triage/text.hpp"

namespace triage::http {

namespace {

httplib::Client make_client(const std::string& base_url, const Options& options) {
    httplib::Client client(base_url);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    client.set_write_timeout(options.timeout);
    client.set_follow_location(true);
    return client;
}

httplib::Headers to_headers(const Options& options) {
    httplib::Headers h;
    for (const auto& [k, v] : options.headers)
        h.emplace(k, v);
    return h;
}

ingest::HttpResponse convert(const httplib::Result& res, const std::string& what) {
    if (!res && (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout))
        throw TransportTimeout(what + ": " + httplib::to_string(res.error()));
    if (!res)
        throw FetchError(what + ": " + httplib::to_string(res.error()));
    ingest::HttpResponse out;
    out.status = res->status;
    out.body = res->body;
    for (const auto& [k, v] : res->headers)
        out.headers[text::to_lower(k)] = v;
    return out;
}

}  // namespace

ingest::HttpResponse get(const std::string& base_url, const std::string& path, const Options& options) {
    auto client = make_client(base_url, options);
    return convert(client.Get(path, to_headers(options)), "GET " + base_url + path);
}

ingest::HttpResponse post(const std::string& base_url, const std::string& path, const std::string& body,
                          const std::string& content_type, const Options& options) {
    auto client = make_client(base_url, options);
    return convert(client.Post(path, to_headers(options), body, content_type), "POST " + base_url + path);
}

}  // namespace triage::http
