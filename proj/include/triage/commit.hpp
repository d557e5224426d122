#pragma once

// Commit retrieval from a code-hosting service. Requests go through a
// Transport so the pipeline can run against recorded fixtures or a disk
// cache instead of the network.

#include "triage/json_io.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace triage::ingest {

struct HttpRequest {
    std::string path;    // e.g. "/repos/owner/repo/commits/<sha>"
    std::string accept;  // media type of the requested representation

    friend auto operator<=>(const HttpRequest&, const HttpRequest&) = default;
};

struct HttpResponse {
    int status = 0;
    std::map<std::string, std::string> headers;  // lower-case names
    std::string body;

    std::optional<std::string> header(std::string_view name) const;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const HttpRequest& request) = 0;
};

/// Serves recorded responses; unknown requests get a 404.
/// Fixture files look like
/// `{"responses": [{"path": ..., "accept": ..., "status": 200, "headers": {}, "body": "..."}]}`.
class FixtureTransport : public Transport {
public:
    FixtureTransport() = default;
    void load_file(const std::filesystem::path& path);
    void load_json(const json& doc);

    void add(HttpRequest request, HttpResponse response);
    HttpResponse get(const HttpRequest& request) override;

    std::size_t request_count() const;

private:
    mutable std::mutex mu_;
    std::map<HttpRequest, HttpResponse> responses_;
    std::size_t requests_ = 0;
};

/// Replays responses from a directory, one JSON file per request keyed by the
/// SHA-256 of the request; misses are forwarded and 200/404 answers stored.
class CachingTransport : public Transport {
public:
    CachingTransport(std::shared_ptr<Transport> inner, std::filesystem::path dir);
    HttpResponse get(const HttpRequest& request) override;

private:
    std::filesystem::path entry_path(const HttpRequest& request) const;

    std::shared_ptr<Transport> inner_;
    std::filesystem::path dir_;
};

/// Spaces requests at least `min_interval` apart across threads.
class RateLimiter {
public:
    explicit RateLimiter(std::chrono::milliseconds min_interval) : interval_(min_interval) {}
    void acquire();

private:
    std::mutex mu_;
    std::chrono::milliseconds interval_;
    std::chrono::steady_clock::time_point next_{};
};

/// HTTPS client for the GitHub REST API. The token, when non-empty, is sent
/// as a bearer credential.
class HttpTransport : public Transport {
public:
    HttpTransport(std::string base_url, std::string token, std::chrono::milliseconds min_interval,
                  std::chrono::seconds timeout = std::chrono::seconds(30));
    HttpResponse get(const HttpRequest& request) override;

private:
    std::string base_url_;
    std::string token_;
    RateLimiter limiter_;
    std::chrono::seconds timeout_;
};

// ---------------------------------------------------------------------------

struct CommitRef {
    std::string owner;
    std::string repo;
    std::string sha;
};

/// Accepts https://github.com/<owner>/<repo>/commit/<sha> (also /commits/<sha>
/// and /pull/<n>/commits/<sha>). Throws NotACommitUrl for anything else.
CommitRef parse_commit_url(std::string_view url);
bool is_commit_url(std::string_view url);

struct CommitData {
    std::string url;
    std::string date;  // committer date as published
    std::string message;
    std::string diff_text;
    std::map<std::string, std::string> file_contents;  // pre-change text by path
    std::set<std::string> unavailable;                 // binary, created, or missing pre-image
    std::optional<std::string> issue_message;
};

inline constexpr std::string_view kAcceptJson = "application/vnd.github+json";
inline constexpr std::string_view kAcceptDiff = "application/vnd.github.diff";
inline constexpr std::string_view kAcceptRaw = "application/vnd.github.raw";

/// Fetches commit metadata, its unified diff, the parent-revision contents of
/// every changed file, and the message of an issue the commit closes.
/// Throws NotACommitUrl, RateLimited (403/429 with exhausted quota) or FetchError.
CommitData fetch_commit(std::string_view url, Transport& client);

/// Issue number referenced with a closing keyword ("fixes #12"), if any.
std::optional<int> linked_issue(std::string_view commit_message);

/// Retries fetch_commit on RateLimited, sleeping via `sleep` between attempts.
CommitData fetch_commit_with_retry(std::string_view url, Transport& client, int max_attempts,
                                   const std::function<void(std::chrono::seconds)>& sleep);

}  // namespace triage::ingest
