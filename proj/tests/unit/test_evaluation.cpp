#include "doctest.h"

#include "../support/records.hpp"
#include "../support/tempdir.hpp"

#include "triage/error.hpp"
#include "triage/evaluation.hpp"

using namespace triage;
using namespace triage::eval;
using records::cwes;
using records::gt;

namespace {

InferenceOutcome outcome(CweSet exact, CweSet top, std::optional<SeverityLabel> label, int score_tenths) {
    InferenceOutcome o;
    o.exact_cwes = std::move(exact);
    o.top_cwes = std::move(top);
    o.label = label;
    o.score = score_tenths < 0 ? SeverityScore::declined() : SeverityScore::from_tenths(score_tenths);
    return o;
}

Verdict cwe_verdict(CweSet identified, CweSet truth) {
    return eval_record(outcome(identified, identified, std::nullopt, -1), {truth, SeverityLabel::Low,
                                                                           SeverityScore::from_tenths(10)});
}

EvaluatedRecord evaluated(const std::string& cve, PromptVariant v, const GroundTruth& g, const InferenceOutcome& o,
                          std::optional<std::string> language = std::nullopt) {
    return {cve, v, g, o, eval_record(o, g), std::move(language)};
}

}  // namespace

TEST_CASE("cwe status classification") {
    auto eq = classify_cwe_status(cwes({79}), cwes({79}));
    CHECK(eq.status == CweStatus::Equal);
    CHECK(eq.identified_in_gt);
    CHECK(eq.gt_in_identified);

    auto sub = classify_cwe_status(cwes({79}), cwes({79, 89}));
    CHECK(sub.status == CweStatus::SubsetEqual);
    CHECK(sub.identified_in_gt);
    CHECK_FALSE(sub.gt_in_identified);

    auto sup = classify_cwe_status(cwes({79, 89}), cwes({79}));
    CHECK(sup.status == CweStatus::SubsetEqual);
    CHECK(sup.gt_in_identified);

    CHECK(classify_cwe_status(cwes({79, 20}), cwes({89, 20})).status == CweStatus::Overlapped);
    CHECK(classify_cwe_status(cwes({79}), cwes({89})).status == CweStatus::NonOverlapped);

    auto none = classify_cwe_status({}, cwes({79}));
    CHECK(none.status == CweStatus::NonOverlapped);
    CHECK_FALSE(none.identified_in_gt);
    CHECK_FALSE(none.gt_in_identified);
}

TEST_CASE("severity verdicts") {
    auto g = gt({79}, SeverityLabel::High, 80);
    auto v = eval_record(outcome({}, {}, SeverityLabel::Critical, 92), g);
    CHECK_FALSE(v.label_match);
    CHECK_FALSE(v.score_exact);
    CHECK_FALSE(v.score_label_range);
    CHECK(v.distance_ok(Distance::from_tenths(15)));
    CHECK_FALSE(v.distance_ok(Distance::from_tenths(10)));

    auto crit = gt({79}, SeverityLabel::Critical, 80);
    CHECK(eval_record(outcome({}, {}, SeverityLabel::Critical, 92), crit).score_label_range);

    auto decline = eval_record(outcome({}, {}, std::nullopt, -1), g);
    CHECK_FALSE(decline.label_match);
    CHECK_FALSE(decline.score_exact);
    CHECK_FALSE(decline.score_label_range);
    for (auto d : kStandardDistances)
        CHECK_FALSE(decline.distance_ok(d));

    auto exact = eval_record(outcome(cwes({269}), cwes({269}), SeverityLabel::High, 80), gt({269}, SeverityLabel::High, 80));
    CHECK(satisfies(exact, CriterionId::CwePe));
    CHECK(satisfies(exact, CriterionId::SevScoreExact));
    CHECK(satisfies(exact, CriterionId::TotalPmLabel));
    CHECK(satisfies(exact, CriterionId::TotalPmDist));

    auto extra = eval_record(outcome({}, {}, SeverityLabel::High, 50), g, {Distance::from_tenths(30)});
    CHECK(extra.distance_ok(Distance::from_tenths(30)));
    CHECK_FALSE(extra.distance_ok(Distance::from_tenths(15)));
}

TEST_CASE("accuracy examples") {
    std::vector<Verdict> all_equal(3, cwe_verdict(cwes({79}), cwes({79})));
    CHECK(accuracy(all_equal, CriterionId::CwePe, PromptVariant::Description).accuracy == 1.0);

    std::vector<Verdict> mixed = {cwe_verdict(cwes({79}), cwes({79, 89})), cwe_verdict(cwes({89}), cwes({79, 89})),
                                  cwe_verdict(cwes({20}), cwes({20})), cwe_verdict(cwes({1}), cwes({2}))};
    auto pc = accuracy(mixed, CriterionId::CwePc, PromptVariant::Description);
    CHECK(pc.numerator == 3);
    CHECK(pc.denominator == 4);
    CHECK(pc.accuracy == 0.75);
    CHECK(accuracy(mixed, CriterionId::CwePe, PromptVariant::Description).accuracy == 0.25);

    auto g = gt({79}, SeverityLabel::High, 75);
    std::vector<Verdict> total = {
        eval_record(outcome(cwes({79}), cwes({79}), SeverityLabel::High, 75), g),
        eval_record(outcome(cwes({79}), cwes({79}), SeverityLabel::Low, 20), g),
        eval_record(outcome(cwes({89}), cwes({89}), SeverityLabel::High, 75), g),
        eval_record(outcome({}, {}, std::nullopt, -1), g),
    };
    CHECK(accuracy(total, CriterionId::TotalPmLabel, PromptVariant::Description).accuracy == 0.25);
    CHECK_THROWS_AS(accuracy({}, CriterionId::CwePe, PromptVariant::Description), EmptyEvaluationSet);

    auto d = distance_accuracy(total, Distance::from_tenths(25), PromptVariant::Description);
    CHECK(d.criterion == "SEV_SCORE_DIST_25");
}

TEST_CASE("criterion names round-trip") {
    CHECK(kAllCriteria.size() == 14);
    for (auto c : kAllCriteria)
        CHECK(parse_criterion(to_string(c)) == c);
    CHECK_FALSE(parse_criterion("CWE_XX"));
}

TEST_CASE("label distribution") {
    auto g = gt({79}, SeverityLabel::Medium, 50);
    std::vector<EvaluatedRecord> declines;
    for (int i = 0; i < 3; ++i)
        declines.push_back(evaluated("CVE-2022-000" + std::to_string(i), PromptVariant::Description, g,
                                     outcome({}, {}, std::nullopt, -1)));
    auto d = label_distribution(declines);
    CHECK(d.size() == 5);
    CHECK(d["NULL"].identified == 3);
    CHECK(d["MEDIUM"].ground_truth == 3);
    CHECK(d["MEDIUM"].identified == 0);

    std::vector<EvaluatedRecord> echo = {
        evaluated("CVE-2022-0001", PromptVariant::Description, g, outcome(g.cwes, g.cwes, g.label, 50))};
    auto e = label_distribution(echo);
    for (const auto& [label, counts] : e)
        CHECK(counts.ground_truth == counts.identified);
}

TEST_CASE("language breakdown") {
    auto g = gt({79}, SeverityLabel::High, 75);
    std::vector<EvaluatedRecord> recs;
    for (int i = 0; i < 12; ++i) {
        bool right = i < 10;
        auto o = right ? outcome(g.cwes, g.cwes, g.label, 75) : outcome(cwes({1}), cwes({1}), SeverityLabel::Low, 10);
        recs.push_back(evaluated("CVE-2022-1" + std::to_string(100 + i), PromptVariant::Description, g, o, "php"));
    }
    recs.push_back(evaluated("CVE-2022-2000", PromptVariant::Description, g, outcome(g.cwes, g.cwes, g.label, 75), "c"));
    recs.push_back(evaluated("CVE-2022-2001", PromptVariant::Description, g, outcome(g.cwes, g.cwes, g.label, 75)));
    auto b = language_breakdown(recs);
    CHECK(b.size() == 2);
    CHECK(b["php"].records == 12);
    CHECK(b["php"].cwe_correct == 10);
    CHECK(b["php"].label_correct == 10);
    CHECK(b["c"].records == 1);
    CHECK(b["c"].cwe_correct == 1);
}

TEST_CASE("dominant language") {
    EnrichedRecord r;
    r.files.push_back({"a.py", "x\n", {{1, "x"}}});
    r.files.push_back({"b.c", "x\ny\n", {{1, "x"}, {2, "y"}}});
    r.files.push_back({"c.go", "x\ny\n", {{1, "x"}, {2, "y"}}});
    r.files.push_back({"README.md", "x\ny\nz\n", {{1, "x"}, {2, "y"}, {3, "z"}}});
    CHECK(dominant_language(r) == extract::LanguageId::C);
    EnrichedRecord none;
    none.files.push_back({"notes.txt", "x\n", {{1, "x"}}});
    CHECK_FALSE(dominant_language(none));
}

TEST_CASE("report bundle") {
    testing_support::TempDir dir("report");
    auto g = gt({79}, SeverityLabel::High, 75);
    std::vector<EvaluatedRecord> recs;
    for (auto v : kEvaluationVariants)
        for (int i = 0; i < 3; ++i)
            recs.push_back(evaluated("CVE-2022-000" + std::to_string(i), v, g,
                                     i == 0 ? outcome({}, {}, std::nullopt, -1) : outcome(g.cwes, g.cwes, g.label, 75),
                                     "c"));
    auto reports = generate_report(recs, {}, dir.path());
    CHECK(reports.size() == 56);
    for (const auto& r : reports)
        CHECK(r.denominator == 3);
    auto summary = read_json_file(dir / "summary.json");
    CHECK(summary.size() == 56);
    for (auto v : kEvaluationVariants) {
        CHECK(std::filesystem::exists(dir / ("distribution_" + std::string(to_string(v)) + ".json")));
        CHECK(std::filesystem::exists(dir / ("languages_" + std::string(to_string(v)) + ".json")));
    }
    auto md = read_text_file(dir / "report.md");
    CHECK(md.find("| CWE_PE | 0.667 (2/3) |") != std::string::npos);
    CHECK(md.find("Records per variant: DESCRIPTION=3") != std::string::npos);

    auto first = md;
    auto reversed = recs;
    std::reverse(reversed.begin(), reversed.end());
    generate_report(reversed, {}, dir.path());
    CHECK(read_text_file(dir / "report.md") == first);

    ReportOptions none;
    none.criteria.clear();
    CHECK_THROWS_AS(generate_report(recs, none, dir.path()), ConfigError);
    CHECK_THROWS_AS(generate_report({}, {}, dir.path()), EmptyEvaluationSet);
}
