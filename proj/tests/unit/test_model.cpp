#include "doctest.h"

#include "triage/error.hpp"
#include "triage/json_io.hpp"
#include "triage/model.hpp"

#include <random>

using namespace triage;

TEST_CASE("parse_cwe_id accepts the canonical, lower-case and numeric forms") {
    CHECK(CweId::parse("CWE-79").value() == 79);
    CHECK(CweId::parse("cwe-79").value() == 79);
    CHECK(CweId::parse("79").value() == 79);
    CHECK(CweId::parse(" CWE-416 ").str() == "CWE-416");
}

TEST_CASE("parse_cwe_id rejects zero, negative and non-numeric ids") {
    CHECK_THROWS_AS(CweId::parse("CWE-0"), MalformedCweId);
    CHECK_THROWS_AS(CweId::parse("CWE--5"), MalformedCweId);
    CHECK_THROWS_AS(CweId::parse("-5"), MalformedCweId);
    CHECK_THROWS_AS(CweId::parse("CWE-"), MalformedCweId);
    CHECK_THROWS_AS(CweId::parse("CWE-79a"), MalformedCweId);
    CHECK_THROWS_AS(CweId::parse("NVD-CWE-Other"), MalformedCweId);
    CHECK_THROWS_AS(CweId::parse("CWE-99999999999"), MalformedCweId);
}

TEST_CASE("NVD placeholders are unknown rather than malformed") {
    CHECK_FALSE(parse_cwe_or_unknown("NVD-CWE-Other").has_value());
    CHECK_FALSE(parse_cwe_or_unknown("NVD-CWE-noinfo").has_value());
    CHECK(parse_cwe_or_unknown("CWE-20")->value() == 20);
}

TEST_CASE("CweId canonical text round-trips") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::uint32_t> dist(1, 2000);
    for (int i = 0; i < 500; ++i) {
        std::string text = "CWE-" + std::to_string(dist(rng));
        CHECK(CweId::parse(text).str() == text);
    }
}

TEST_CASE("validate_score rounds to one decimal half away from zero") {
    CHECK(validate_score(9.2).str() == "9.2");
    CHECK(validate_score(9.25).str() == "9.3");
    CHECK(validate_score(2.45).str() == "2.5");
    CHECK(validate_score(0.04).str() == "0.0");
    CHECK(validate_score(10).str() == "10.0");
    CHECK(validate_score(-1).is_declined());
    CHECK(validate_score(-1).str() == "-1");
}

TEST_CASE("validate_score rejects values outside [0, 10]") {
    CHECK_THROWS_AS(validate_score(10.01), ScoreOutOfRange);
    CHECK_THROWS_AS(validate_score(-0.5), ScoreOutOfRange);
    CHECK_THROWS_AS(validate_score(-2), ScoreOutOfRange);
    CHECK_THROWS_AS(validate_score(std::nan("")), ScoreOutOfRange);
}

TEST_CASE("SeverityScore JSON rendering round-trips on the whole grid") {
    for (int t = 0; t <= 100; ++t) {
        auto s = SeverityScore::from_tenths(t);
        CHECK(score_from_json(score_to_json(s)) == s);
        CHECK(score_from_json(json(s.str())) == s);
    }
    CHECK(score_from_json(score_to_json(SeverityScore::declined())).is_declined());
}

TEST_CASE("labels are case-sensitive tokens") {
    CHECK(parse_label("HIGH") == SeverityLabel::High);
    CHECK_FALSE(parse_label("high").has_value());
    CHECK_FALSE(parse_label("SEVERE").has_value());
}

TEST_CASE("CVSS version identifiers normalize") {
    CHECK(parse_cvss_version("3.1") == CvssVersion::V3_1);
    CHECK(parse_cvss_version("V3.1") == CvssVersion::V3_1);
    CHECK(parse_cvss_version("cvssMetricV31") == CvssVersion::V3_1);
    CHECK(parse_cvss_version("cvssMetricV30") == CvssVersion::V3_0);
    CHECK(parse_cvss_version("cvssMetricV2") == CvssVersion::V2_0);
    CHECK(parse_cvss_version("2.0") == CvssVersion::V2_0);
    CHECK_THROWS_AS(parse_cvss_version("4.0"), UnknownCvssVersion);
    CHECK_THROWS_AS(parse_cvss_version(""), UnknownCvssVersion);
    CHECK(CvssVersion::V2_0 < CvssVersion::V3_0);
    CHECK(CvssVersion::V3_0 < CvssVersion::V3_1);
}

TEST_CASE("variants and tasks") {
    for (auto v : kAllVariants)
        CHECK(parse_variant(to_string(v)) == v);
    CHECK(parse_variant("description-hunks") == PromptVariant::DescriptionHunks);
    CHECK_FALSE(includes_description(PromptVariant::HunksOnly));
    CHECK(granularity_of(PromptVariant::MethodsOnly) == Granularity::Methods);
    CHECK(parse_task("cwe") == TaskKind::Cwe);
    CHECK(parse_task("SEVERITY") == TaskKind::Severity);
    CHECK_FALSE(parse_task("both").has_value());
}

namespace {

EnrichedRecord sample_record() {
    EnrichedRecord r;
    r.cve = "CVE-2022-1234";
    r.description = "XSS in search page";
    r.url = "https://github.com/acme/web/commit/abcdef1";
    r.commit_date = "2022-03-04T10:00:00Z";
    r.files.push_back({"src/search.php", "<?php\nfunction s($q) {\n  echo $q;\n}\n", {{3, "  echo $q;"}}});
    r.hunks.push_back({"src/search.php", "@@ -3 +3 @@", {{3, "  echo $q;"}}, {{3, "  echo htmlspecialchars($q);"}}});
    r.methods.push_back({"src/search.php", "php", "s", 2, 4, "function s($q) {\n  echo $q;\n}"});
    return r;
}

}  // namespace

TEST_CASE("EnrichedRecord validation and JSON round-trip") {
    auto r = sample_record();
    CHECK_NOTHROW(validate(r));
    json j = r;
    CHECK(j.contains("buggy_code"));
    CHECK(j["github_description"].is_null());
    CHECK(record_from_json(j) == r);

    r.github_description = "Issue: search is unsafe";
    CHECK(record_from_json(json(r)) == r);
}

TEST_CASE("EnrichedRecord invariants") {
    auto bad_cve = sample_record();
    bad_cve.cve = "CVE-22-1";
    CHECK_THROWS_AS(validate(bad_cve), MalformedRecord);

    auto unknown_file = sample_record();
    unknown_file.hunks[0].filename = "other.php";
    CHECK_THROWS_AS(validate(unknown_file), MalformedRecord);

    auto decreasing = sample_record();
    decreasing.files[0].buggy_lines = {{3, "a"}, {2, "b"}};
    CHECK_THROWS_AS(validate(decreasing), MalformedRecord);

    auto beyond = sample_record();
    beyond.files[0].buggy_lines = {{9, "a"}};
    CHECK_THROWS_AS(validate(beyond), MalformedRecord);

    auto body = sample_record();
    body.methods[0].body = "function s($q) {";
    CHECK_THROWS_AS(validate(body), MalformedRecord);
}

TEST_CASE("GroundTruth invariants") {
    GroundTruth gt{{CweId(79)}, SeverityLabel::Medium, validate_score(5.4), CvssVersion::V3_1};
    CHECK_NOTHROW(validate(gt));
    CHECK(ground_truth_from_json(json(gt)) == gt);

    auto empty = gt;
    empty.cwes.clear();
    CHECK_THROWS_AS(validate(empty), MalformedRecord);

    auto sentinel = gt;
    sentinel.score = SeverityScore::declined();
    CHECK_THROWS_AS(validate(sentinel), MalformedRecord);

    auto critical_v2 = gt;
    critical_v2.label = SeverityLabel::Critical;
    critical_v2.version = CvssVersion::V2_0;
    CHECK_THROWS_AS(validate(critical_v2), MalformedRecord);
}

TEST_CASE("InferenceOutcome requires exact within top and at most five candidates") {
    InferenceOutcome o;
    o.exact_cwes = {CweId(79)};
    o.top_cwes = {CweId(79), CweId(89)};
    CHECK_NOTHROW(validate(o));
    o.exact_cwes = {CweId(20)};
    CHECK_THROWS_AS(validate(o), FormatViolation);
    o.exact_cwes = {};
    o.top_cwes = {CweId(1), CweId(2), CweId(3), CweId(4), CweId(5), CweId(6)};
    CHECK_THROWS_AS(validate(o), FormatViolation);
}

TEST_CASE("Distance must sit on the 0.1 grid") {
    CHECK(Distance::from_value(1.5).tenths() == 15);
    CHECK(Distance::from_value(0.5).str() == "0.5");
    CHECK_THROWS_AS(Distance::from_value(0.25), ConfigError);
    CHECK_THROWS_AS(Distance::from_value(0), ConfigError);
}
