#include "doctest.h"

#include "../support/fixtures.hpp"

#include "triage/dataset.hpp"
#include "triage/error.hpp"
#include "triage/nvd.hpp"
#include "triage/text.hpp"

#include <random>

using namespace triage;
using namespace triage::ingest;

namespace {

const char* kLegacyFeed = R"({
  "CVE_data_type": "CVE",
  "CVE_Items": [{
    "cve": {
      "CVE_data_meta": {"ID": "CVE-2021-44228"},
      "problemtype": {"problemtype_data": [{"description": [
        {"lang": "en", "value": "CWE-502"}, {"lang": "en", "value": "CWE-20"}]}]},
      "references": {"reference_data": [
        {"url": "https://logging.apache.org/"},
        {"url": "https://github.com/apache/logging-log4j2/commit/c77b3cb39312b83b053d23a2158b99ac7de44dd3"}]},
      "description": {"description_data": [{"lang": "en", "value": "JNDI lookup allows remote code execution."}]}
    },
    "impact": {
      "baseMetricV3": {"cvssV3": {"version": "3.1", "baseScore": 10.0, "baseSeverity": "CRITICAL"}},
      "baseMetricV2": {"cvssV2": {"version": "2.0", "baseScore": 9.3}, "severity": "HIGH"}
    },
    "publishedDate": "2021-12-10T10:15Z"
  }]
})";

const char* kApiFeed = R"({
  "vulnerabilities": [{
    "cve": {
      "id": "CVE-2023-1000",
      "descriptions": [{"lang": "es", "value": "desbordamiento"}, {"lang": "en", "value": "Heap overflow."}],
      "weaknesses": [{"description": [{"lang": "en", "value": "NVD-CWE-Other"}]},
                     {"description": [{"lang": "en", "value": "CWE-787"}]}],
      "references": [{"url": "https://github.com/acme/app/commit/abcdef12"}],
      "metrics": {
        "cvssMetricV31": [{"cvssData": {"version": "3.1", "baseScore": 7.8, "baseSeverity": "HIGH"}}],
        "cvssMetricV2": [{"cvssData": {"version": "2.0", "baseScore": 6.8}, "baseSeverity": "MEDIUM"}]
      }
    }
  }, {
    "cve": {"id": "CVE-2023-1001", "descriptions": []}
  }]
})";

}  // namespace

TEST_CASE("legacy feed items") {
    auto entries = parse_nvd_feed(kLegacyFeed);
    REQUIRE(entries.size() == 1);
    const auto& e = entries[0];
    CHECK(e.cve == "CVE-2021-44228");
    CHECK(e.description == "JNDI lookup allows remote code execution.");
    CHECK(e.cwe_texts == std::vector<std::string>{"CWE-502", "CWE-20"});
    CHECK(e.reference_urls.size() == 2);
    REQUIRE(e.cvss_entries.size() == 2);
    CHECK(first_commit_url(e) == e.reference_urls[1]);
}

TEST_CASE("API 2.0 items, missing fields are empty") {
    auto entries = parse_nvd_feed(kApiFeed);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].description == "Heap overflow.");
    CHECK(entries[0].cwe_texts.size() == 2);
    CHECK(entries[0].cvss_entries.size() == 2);
    CHECK(entries[1].description.empty());
    CHECK(entries[1].cvss_entries.empty());
    CHECK_FALSE(first_commit_url(entries[1]).has_value());

    auto store = cve2cwe_from_feed(entries);
    REQUIRE(store.count("CVE-2023-1000"));
    CHECK(parse_cve2cwe(cve2cwe_to_json(store)).at("CVE-2023-1000").cwes ==
          store.at("CVE-2023-1000").cwes);
}

TEST_CASE("malformed feeds") {
    CHECK_THROWS_AS(parse_nvd_feed("{not json"), FeedSyntaxError);
    CHECK_THROWS_AS(parse_nvd_feed(R"({"foo": []})"), FeedSyntaxError);
    CHECK_THROWS_AS(parse_nvd_feed(R"({"vulnerabilities": [{"cve": {}}]})"), FeedSyntaxError);
}

TEST_CASE("commit URL recognition") {
    auto ref = parse_commit_url("https://github.com/acme/app/commit/ABCDEF1234");
    CHECK(ref.owner == "acme");
    CHECK(ref.repo == "app");
    CHECK(ref.sha == "abcdef1234");
    CHECK(is_commit_url("https://github.com/a/b/pull/12/commits/abcdef1"));
    CHECK(is_commit_url("https://github.com/a/b/commit/abcdef1?diff=split"));
    CHECK_FALSE(is_commit_url("https://github.com/a/b/issues/3"));
    CHECK_FALSE(is_commit_url("https://gitlab.com/a/b/-/commit/abcdef1"));
    CHECK_FALSE(is_commit_url("https://github.com/a/b/commit/xyz"));
    CHECK_THROWS_AS(parse_commit_url("https://example.com"), NotACommitUrl);
}

TEST_CASE("closing keywords link an issue") {
    CHECK(linked_issue("Escape output\n\nFixes #42") == 42);
    CHECK(linked_issue("closes: #7") == 7);
    CHECK(linked_issue("Resolved #100 and more") == 100);
    CHECK_FALSE(linked_issue("See #42").has_value());
}

TEST_CASE("fetch_commit and assemble_record") {
    fixtures::FakeCommit c;
    c.message = "Bound the copy\n\nfixes #9";
    c.diff =
        "diff --git a/src/copy.c b/src/copy.c\n"
        "--- a/src/copy.c\n"
        "+++ b/src/copy.c\n"
        "@@ -2,2 +2,2 @@ int copy(char *d, const char *s)\n"
        " {\n"
        "-    strcpy(d, s);\n"
        "+    strncpy(d, s, 15);\n"
        "diff --git a/docs/new.md b/docs/new.md\n"
        "new file mode 100644\n"
        "--- /dev/null\n"
        "+++ b/docs/new.md\n"
        "@@ -0,0 +1 @@\n"
        "+notes\n";
    c.pre_images["src/copy.c"] = "int copy(char *d, const char *s)\n{\n    strcpy(d, s);\n}\n";
    FixtureTransport t;
    fixtures::add_commit(t, c);
    t.add({"/repos/acme/app/issues/9", std::string(kAcceptJson)},
          {200, {}, R"({"title": "Overflow in copy", "body": "Long names crash."})"});

    auto data = fetch_commit(c.url(), t);
    CHECK(data.date == c.date);
    CHECK(data.issue_message == "Overflow in copy\n\nLong names crash.");
    CHECK(data.unavailable.count("docs/new.md"));

    RawCveEntry entry{"CVE-2022-0001", "Overflow.", {c.url()}, {"CWE-787"}, {}};
    auto record = assemble_record(entry, data);
    CHECK_NOTHROW(validate(record));
    CHECK(record.url == c.url());
    CHECK(record.github_description == data.issue_message);
    REQUIRE(record.files.size() == 2);
    const auto& copy = record.files[0].filename == "src/copy.c" ? record.files[0] : record.files[1];
    REQUIRE(copy.buggy_lines.size() == 1);
    CHECK(copy.buggy_lines[0].line_number == 3);
    CHECK(record.hunks.size() == 2);
}

TEST_CASE("rate limiting is surfaced and retried") {
    struct Flaky : Transport {
        FixtureTransport inner;
        int limited = 2;
        HttpResponse get(const HttpRequest& r) override {
            if (limited > 0) {
                --limited;
                return {403, {{"x-ratelimit-remaining", "0"}, {"retry-after", "3"}}, "{}"};
            }
            return inner.get(r);
        }
    } flaky;
    fixtures::FakeCommit c;
    c.diff = "--- a/x.py\n+++ b/x.py\n@@ -1 +1 @@\n-a = 1\n+a = 2\n";
    c.pre_images["x.py"] = "a = 1\n";
    fixtures::add_commit(flaky.inner, c);

    std::vector<long> sleeps;
    auto sleeper = [&](std::chrono::seconds s) { sleeps.push_back(static_cast<long>(s.count())); };
    auto data = fetch_commit_with_retry(c.url(), flaky, 5, sleeper);
    CHECK(data.file_contents.at("x.py") == "a = 1\n");
    CHECK(sleeps == std::vector<long>{3, 3});

    flaky.limited = 10;
    CHECK_THROWS_AS(fetch_commit_with_retry(c.url(), flaky, 2, sleeper), RateLimited);
}

TEST_CASE("missing commits fail to fetch") {
    FixtureTransport t;
    CHECK_THROWS_AS(fetch_commit("https://github.com/a/b/commit/abcdef1", t), FetchError);
}

TEST_CASE("caching transport replays from disk") {
    auto dir = std::filesystem::temp_directory_path() / "triage-cache-test";
    std::filesystem::remove_all(dir);
    auto inner = std::make_shared<FixtureTransport>();
    inner->add({"/x", "a"}, {200, {{"etag", "1"}}, "body"});
    CachingTransport cache(inner, dir);
    CHECK(cache.get({"/x", "a"}).body == "body");
    CHECK(cache.get({"/x", "a"}).body == "body");
    CHECK(cache.get({"/missing", "a"}).status == 404);
    CHECK(cache.get({"/missing", "a"}).status == 404);
    CHECK(inner->request_count() == 2);
    CachingTransport again(std::make_shared<FixtureTransport>(), dir);
    CHECK(again.get({"/x", "a"}).header("etag") == "1");
    std::filesystem::remove_all(dir);
}

TEST_CASE("split sizes and determinism") {
    std::vector<int> items(1155);
    std::iota(items.begin(), items.end(), 0);
    auto s = split_dataset(items, 0.5, 42);
    CHECK(s.evaluation.size() == 577);
    CHECK(s.finetune.size() == 578);
    auto again = split_dataset(items, 0.5, 42);
    CHECK(again.evaluation == s.evaluation);
    CHECK(std::is_sorted(s.evaluation.begin(), s.evaluation.end()));
    auto other = split_dataset(items, 0.5, 43);
    CHECK(other.evaluation != s.evaluation);
    CHECK_THROWS_AS(split_dataset(items, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(split_dataset(items, 0.0, 1), ConfigError);
}

TEST_CASE("split is a partition for random sizes and fractions") {
    std::mt19937 rng(11);
    for (int round = 0; round < 300; ++round) {
        std::size_t n = rng() % 200;
        double f = 0.05 + (rng() % 90) / 100.0;
        std::vector<std::size_t> items(n);
        std::iota(items.begin(), items.end(), std::size_t{0});
        auto s = split_dataset(items, f, rng());
        CHECK(s.evaluation.size() == static_cast<std::size_t>(std::floor(n * f + 1e-9)));
        std::vector<std::size_t> all = s.evaluation;
        all.insert(all.end(), s.finetune.begin(), s.finetune.end());
        std::sort(all.begin(), all.end());
        CHECK(all == items);
    }
}

TEST_CASE("evaluation sampling") {
    std::vector<int> items(100);
    std::iota(items.begin(), items.end(), 0);
    auto sample = sample_evaluation(items, 30, 5);
    CHECK(sample.size() == 30);
    CHECK(std::set<int>(sample.begin(), sample.end()).size() == 30);
    CHECK(sample == sample_evaluation(items, 30, 5));
    CHECK(sample_evaluation(items, 100, 5) == items);
    CHECK_THROWS_AS(sample_evaluation(items, 101, 5), SampleTooLarge);
}

TEST_CASE("permutation is a fixed function of the seed") {
    // Pinned so a change of RNG or shuffle algorithm is noticed.
    auto p = ingest::detail::permutation(8, 42);
    std::vector<std::size_t> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(p == ingest::detail::permutation(8, 42));
}

TEST_CASE("dataset store is content addressed") {
    auto dir = std::filesystem::temp_directory_path() / "triage-store-test";
    std::filesystem::remove_all(dir);
    DatasetStore store(dir);
    EnrichedRecord r;
    r.cve = "CVE-2022-0002";
    r.description = "d";
    r.url = "https://github.com/a/b/commit/abcdef1";
    r.commit_date = "2022-01-01";
    auto hash = store.put(r);
    CHECK(hash == store.put(r));
    CHECK(store.get(hash) == r);

    DatasetManifest m;
    m.seed = 7;
    GroundTruth gt{{CweId(79)}, SeverityLabel::High, validate_score(7.5), CvssVersion::V3_1};
    m.records.push_back({"CVE-2022-0009", hash, SplitSide::Finetune, gt, {PromptVariant::Description}});
    m.records.push_back({"CVE-2022-0002", hash, SplitSide::Evaluation, gt, {PromptVariant::Description}});
    store.write_manifest(m);
    auto back = store.read_manifest();
    CHECK(back.seed == 7);
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].cve == "CVE-2022-0002");
    CHECK(back.records[1].split == SplitSide::Finetune);
    CHECK(back.records[0].ground_truth == gt);

    // Tampering is detected.
    auto file = dir / "records" / hash.substr(0, 2) / (hash + ".json");
    write_text_file(file, "{}\n");
    CHECK_THROWS(store.get(hash));
    std::filesystem::remove_all(dir);
}
