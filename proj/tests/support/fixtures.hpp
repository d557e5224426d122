#pragma once

// Builders for recorded API responses.

#include "triage/commit.hpp"

#include <map>
#include <string>

namespace fixtures {

struct FakeCommit {
    std::string owner = "acme";
    std::string repo = "app";
    std::string sha = "0123456789abcdef0123456789abcdef01234567";
    std::string parent = "fedcba9876543210fedcba9876543210fedcba98";
    std::string date = "2022-05-01T12:00:00Z";
    std::string message = "Fix input handling";
    std::string diff;
    std::map<std::string, std::string> pre_images;  // path -> content

    std::string url() const { return "https://github.com/" + owner + "/" + repo + "/commit/" + sha; }
};

inline void add_commit(triage::ingest::FixtureTransport& t, const FakeCommit& c) {
    using namespace triage::ingest;
    const std::string base = "/repos/" + c.owner + "/" + c.repo;
    triage::json meta{{"sha", c.sha},
                      {"commit", {{"message", c.message}, {"committer", {{"date", c.date}}}}},
                      {"parents", triage::json::array({{{"sha", c.parent}}})}};
    t.add({base + "/commits/" + c.sha, std::string(kAcceptJson)}, {200, {}, meta.dump()});
    t.add({base + "/commits/" + c.sha, std::string(kAcceptDiff)}, {200, {}, c.diff});
    for (const auto& [path, content] : c.pre_images)
        t.add({base + "/contents/" + path + "?ref=" + c.parent, std::string(kAcceptRaw)}, {200, {}, content});
}

}  // namespace fixtures
