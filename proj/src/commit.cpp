#include "triage/commit.hpp"

#include "http.hpp"
#include "triage/diff.hpp"
#include "triage/error.hpp"
#include "triage/text.hpp"

#include <ctime>
#include <regex>
#include <thread>

namespace triage::ingest {

std::optional<std::string> HttpResponse::header(std::string_view name) const {
    auto it = headers.find(text::to_lower(name));
    if (it == headers.end())
        return std::nullopt;
    return it->second;
}

// --- FixtureTransport ------------------------------------------------------

void FixtureTransport::load_file(const std::filesystem::path& path) { load_json(read_json_file(path)); }

void FixtureTransport::load_json(const json& doc) {
    if (!doc.contains("responses") || !doc["responses"].is_array())
        throw IoError("fixture document needs a 'responses' array");
    for (const auto& r : doc["responses"]) {
        HttpResponse resp;
        resp.status = r.value("status", 200);
        resp.body = r.value("body", std::string{});
        if (r.contains("headers"))
            for (const auto& [k, v] : r["headers"].items())
                resp.headers[text::to_lower(k)] = v.get<std::string>();
        add({r.at("path").get<std::string>(), r.value("accept", std::string(kAcceptJson))}, std::move(resp));
    }
}

void FixtureTransport::add(HttpRequest request, HttpResponse response) {
    std::lock_guard lock(mu_);
    responses_[std::move(request)] = std::move(response);
}

HttpResponse FixtureTransport::get(const HttpRequest& request) {
    std::lock_guard lock(mu_);
    ++requests_;
    auto it = responses_.find(request);
    if (it == responses_.end())
        return {404, {}, R"({"message":"Not Found"})"};
    return it->second;
}

std::size_t FixtureTransport::request_count() const {
    std::lock_guard lock(mu_);
    return requests_;
}

// --- CachingTransport ------------------------------------------------------

CachingTransport::CachingTransport(std::shared_ptr<Transport> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {}

std::filesystem::path CachingTransport::entry_path(const HttpRequest& request) const {
    return dir_ / (text::sha256_hex(request.accept + "\n" + request.path) + ".json");
}

HttpResponse CachingTransport::get(const HttpRequest& request) {
    auto file = entry_path(request);
    if (std::filesystem::exists(file)) {
        json j = read_json_file(file);
        HttpResponse r;
        r.status = j.at("status").get<int>();
        r.body = j.at("body").get<std::string>();
        for (const auto& [k, v] : j.at("headers").items())
            r.headers[k] = v.get<std::string>();
        return r;
    }
    HttpResponse r = inner_->get(request);
    if (r.status == 200 || r.status == 404) {
        json j{{"path", request.path}, {"accept", request.accept}, {"status", r.status},
               {"headers", r.headers}, {"body", r.body}};
        write_text_file(file, dump_json(j));
    }
    return r;
}

// --- HttpTransport ---------------------------------------------------------

void RateLimiter::acquire() {
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mu_);
        auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

HttpTransport::HttpTransport(std::string base_url, std::string token, std::chrono::milliseconds min_interval,
                             std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), token_(std::move(token)), limiter_(min_interval), timeout_(timeout) {}

HttpResponse HttpTransport::get(const HttpRequest& request) {
    limiter_.acquire();
    http::Options options;
    options.timeout = timeout_;
    options.headers["Accept"] = request.accept;
    options.headers["User-Agent"] = "vuln-triage";
    options.headers["X-GitHub-Api-Version"] = "2022-11-28";
    if (!token_.empty())
        options.headers["Authorization"] = "Bearer " + token_;
    return http::get(base_url_, request.path, options);
}

// --- commit fetching -------------------------------------------------------

namespace {

std::string percent_encode_path(std::string_view path) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : path) {
        if (std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

bool is_rate_limited(const HttpResponse& r) {
    if (r.status == 429)
        return true;
    if (r.status != 403)
        return false;
    return r.header("x-ratelimit-remaining") == "0" || r.header("retry-after").has_value();
}

long retry_after_seconds(const HttpResponse& r) {
    try {
        if (auto ra = r.header("retry-after"))
            return std::stol(*ra);
        if (auto reset = r.header("x-ratelimit-reset"))
            return std::max(1L, std::stol(*reset) - static_cast<long>(std::time(nullptr)));
    } catch (const std::exception&) {
    }
    return 60;
}

HttpResponse checked_get(Transport& client, const std::string& path, std::string_view accept,
                         bool allow_not_found = false) {
    HttpResponse r = client.get({path, std::string(accept)});
    if (is_rate_limited(r))
        throw RateLimited("rate limited on " + path, retry_after_seconds(r));
    if (r.status == 404 && allow_not_found)
        return r;
    if (r.status != 200)
        throw FetchError("GET " + path + " returned HTTP " + std::to_string(r.status));
    return r;
}

std::string strip_query(std::string_view url) {
    auto cut = url.find_first_of("?#");
    return std::string(url.substr(0, cut));
}

}  // namespace

CommitRef parse_commit_url(std::string_view url) {
    static const std::regex re(
        R"(^https?://(?:www\.)?github\.com/([A-Za-z0-9_.-]+)/([A-Za-z0-9_.-]+)/(?:commits?|pull/\d+/commits)/([0-9a-fA-F]{7,40})/?$)");
    std::string clean = strip_query(text::trim(url));
    std::smatch m;
    if (!std::regex_match(clean, m, re))
        throw NotACommitUrl("not a supported commit URL: " + std::string(url));
    return {m[1].str(), m[2].str(), text::to_lower(m[3].str())};
}

bool is_commit_url(std::string_view url) {
    try {
        parse_commit_url(url);
        return true;
    } catch (const NotACommitUrl&) {
        return false;
    }
}

std::optional<int> linked_issue(std::string_view commit_message) {
    static const std::regex re(R"((?:close[sd]?|fix(?:e[sd])?|resolve[sd]?)\s*:?\s+#(\d+))", std::regex::icase);
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(commit_message.begin(), commit_message.end(), m, re))
        return std::stoi(m[1].str());
    return std::nullopt;
}

CommitData fetch_commit(std::string_view url, Transport& client) {
    CommitRef ref = parse_commit_url(url);
    const std::string repo_path = "/repos/" + ref.owner + "/" + ref.repo;

    HttpResponse meta_resp = checked_get(client, repo_path + "/commits/" + ref.sha, kAcceptJson);
    json meta;
    try {
        meta = json::parse(meta_resp.body);
    } catch (const json::parse_error& e) {
        throw FetchError("commit metadata is not JSON: " + std::string(e.what()));
    }

    CommitData data;
    data.url = std::string(text::trim(url));
    if (auto c = meta.find("commit"); c != meta.end() && c->is_object()) {
        data.message = c->value("message", std::string{});
        if (c->contains("committer") && (*c)["committer"].is_object())
            data.date = (*c)["committer"].value("date", std::string{});
        if (data.date.empty() && c->contains("author") && (*c)["author"].is_object())
            data.date = (*c)["author"].value("date", std::string{});
    }
    std::string parent;
    if (auto p = meta.find("parents"); p != meta.end() && p->is_array() && !p->empty())
        parent = (*p)[0].value("sha", std::string{});

    data.diff_text = checked_get(client, repo_path + "/commits/" + ref.sha, kAcceptDiff).body;

    for (const auto& file : parse_diff_files(data.diff_text)) {
        const std::string& key = file.path();
        if (file.binary || file.created() || parent.empty()) {
            data.unavailable.insert(key);
            continue;
        }
        HttpResponse content = checked_get(
            client, repo_path + "/contents/" + percent_encode_path(file.old_path) + "?ref=" + parent, kAcceptRaw,
            /*allow_not_found=*/true);
        if (content.status == 404)
            data.unavailable.insert(key);
        else
            data.file_contents[key] = std::move(content.body);
    }

    if (auto issue = linked_issue(data.message)) {
        HttpResponse r = checked_get(client, repo_path + "/issues/" + std::to_string(*issue), kAcceptJson,
                                     /*allow_not_found=*/true);
        if (r.status == 200) {
            try {
                json j = json::parse(r.body);
                std::string title = j.value("title", std::string{});
                std::string body = j.contains("body") && j["body"].is_string() ? j["body"].get<std::string>() : "";
                data.issue_message = body.empty() ? title : title + "\n\n" + body;
            } catch (const json::exception&) {
                // Unreadable issue payloads leave the field absent.
            }
        }
    }
    return data;
}

CommitData fetch_commit_with_retry(std::string_view url, Transport& client, int max_attempts,
                                   const std::function<void(std::chrono::seconds)>& sleep) {
    for (int attempt = 1;; ++attempt) {
        try {
            return fetch_commit(url, client);
        } catch (const RateLimited& e) {
            if (attempt >= max_attempts)
                throw;
            sleep(std::chrono::seconds(e.retry_after_seconds()));
        }
    }
}

}  // namespace triage::ingest
