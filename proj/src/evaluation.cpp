#include "triage/evaluation.hpp"

#include "triage/error.hpp"

#include <algorithm>
#include <cstdio>

namespace triage::eval {

namespace {

constexpr std::array<std::pair<CriterionId, std::string_view>, 14> kNames = {{
    {CriterionId::CwePe, "CWE_PE"},
    {CriterionId::CwePc, "CWE_PC"},
    {CriterionId::CweGc, "CWE_GC"},
    {CriterionId::CweTopPc, "CWE_TOP_PC"},
    {CriterionId::CweTopGc, "CWE_TOP_GC"},
    {CriterionId::SevLabel, "SEV_LABEL"},
    {CriterionId::SevScoreExact, "SEV_SCORE_EXACT"},
    {CriterionId::SevScoreLabelRange, "SEV_SCORE_LABEL_RANGE"},
    {CriterionId::SevScoreDist05, "SEV_SCORE_DIST_05"},
    {CriterionId::SevScoreDist10, "SEV_SCORE_DIST_10"},
    {CriterionId::SevScoreDist15, "SEV_SCORE_DIST_15"},
    {CriterionId::TotalPmLabel, "TOTAL_PM_LABEL"},
    {CriterionId::TotalPmLabelRange, "TOTAL_PM_LABEL_RANGE"},
    {CriterionId::TotalPmDist, "TOTAL_PM_DIST"},
}};

std::string distance_name(Distance d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "SEV_SCORE_DIST_%02d", d.tenths());
    return buf;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

AccuracyReport make_report(PromptVariant variant, std::string name, std::size_t hits, std::size_t total) {
    return {variant, std::move(name), hits, total, static_cast<double>(hits) / static_cast<double>(total)};
}

}  // namespace

std::string_view to_string(CriterionId id) {
    for (const auto& [k, name] : kNames)
        if (k == id)
            return name;
    return "?";
}

std::optional<CriterionId> parse_criterion(std::string_view text) {
    for (const auto& [k, name] : kNames)
        if (name == text)
            return k;
    return std::nullopt;
}

CweRelation classify_cwe_status(const CweSet& identified, const CweSet& gt) {
    CweRelation r;
    if (identified.empty())
        return r;
    r.identified_in_gt = is_subset(identified, gt);
    r.gt_in_identified = is_subset(gt, identified);
    if (r.identified_in_gt && r.gt_in_identified)
        r.status = CweStatus::Equal;
    else if (r.identified_in_gt || r.gt_in_identified)
        r.status = CweStatus::SubsetEqual;
    else if (intersects(identified, gt))
        r.status = CweStatus::Overlapped;
    else
        r.status = CweStatus::NonOverlapped;
    return r;
}

Verdict eval_record(const InferenceOutcome& outcome, const GroundTruth& gt,
                    const std::vector<Distance>& extra_distances, const cvss::SchemeStore& schemes) {
    Verdict v;
    v.exact = classify_cwe_status(outcome.exact_cwes, gt.cwes);
    v.top = classify_cwe_status(outcome.top_cwes, gt.cwes);
    v.label_match = outcome.label.has_value() && *outcome.label == gt.label;

    std::vector<Distance> distances(kStandardDistances.begin(), kStandardDistances.end());
    distances.insert(distances.end(), extra_distances.begin(), extra_distances.end());
    const bool scored = !outcome.score.is_declined();
    v.score_exact = scored && outcome.score == gt.score;
    v.score_label_range = scored && cvss::score_to_label(outcome.score, gt.version, schemes) == gt.label;
    for (auto d : distances)
        v.score_distance[d] = scored && cvss::range_covers(cvss::distance_range(outcome.score, d), gt.score);
    return v;
}

bool satisfies(const Verdict& v, CriterionId criterion) {
    const bool pe = v.exact.status == CweStatus::Equal;
    switch (criterion) {
        case CriterionId::CwePe: return pe;
        case CriterionId::CwePc: return v.exact.identified_in_gt;
        case CriterionId::CweGc: return v.exact.gt_in_identified;
        case CriterionId::CweTopPc: return v.top.identified_in_gt;
        case CriterionId::CweTopGc: return v.top.gt_in_identified;
        case CriterionId::SevLabel: return v.label_match;
        case CriterionId::SevScoreExact: return v.score_exact;
        case CriterionId::SevScoreLabelRange: return v.score_label_range;
        case CriterionId::SevScoreDist05: return v.distance_ok(Distance::from_tenths(5));
        case CriterionId::SevScoreDist10: return v.distance_ok(Distance::from_tenths(10));
        case CriterionId::SevScoreDist15: return v.distance_ok(Distance::from_tenths(15));
        case CriterionId::TotalPmLabel: return pe && v.label_match;
        case CriterionId::TotalPmLabelRange: return pe && v.score_label_range;
        case CriterionId::TotalPmDist: return pe && v.distance_ok(kTotalDistance);
    }
    return false;
}

AccuracyReport accuracy(const std::vector<Verdict>& verdicts, CriterionId criterion, PromptVariant variant) {
    if (verdicts.empty())
        throw EmptyEvaluationSet("no verdicts for " + std::string(to_string(variant)));
    auto hits = static_cast<std::size_t>(
        std::count_if(verdicts.begin(), verdicts.end(), [&](const Verdict& v) { return satisfies(v, criterion); }));
    return make_report(variant, std::string(to_string(criterion)), hits, verdicts.size());
}

AccuracyReport distance_accuracy(const std::vector<Verdict>& verdicts, Distance distance, PromptVariant variant) {
    if (verdicts.empty())
        throw EmptyEvaluationSet("no verdicts for " + std::string(to_string(variant)));
    auto hits = static_cast<std::size_t>(std::count_if(
        verdicts.begin(), verdicts.end(), [&](const Verdict& v) { return v.distance_ok(distance); }));
    return make_report(variant, distance_name(distance), hits, verdicts.size());
}

LabelDistribution label_distribution(const std::vector<EvaluatedRecord>& records) {
    LabelDistribution d;
    for (auto label : kAllLabels)
        d[std::string(to_string(label))];
    d["NULL"];
    for (const auto& r : records) {
        d[std::string(to_string(r.ground_truth.label))].ground_truth++;
        d[r.outcome.label ? std::string(to_string(*r.outcome.label)) : "NULL"].identified++;
    }
    return d;
}

std::optional<extract::LanguageId> dominant_language(const EnrichedRecord& record,
                                                     const extract::ExtensionTable& table) {
    std::optional<extract::LanguageId> best;
    std::size_t best_lines = 0;
    for (const auto& f : record.files) {
        auto language = extract::detect_language(f.filename, table);
        if (!language)
            continue;
        if (!best || f.buggy_lines.size() > best_lines) {
            best = language;
            best_lines = f.buggy_lines.size();
        }
    }
    return best;
}

std::map<std::string, LanguageCounts> language_breakdown(const std::vector<EvaluatedRecord>& records) {
    std::map<std::string, LanguageCounts> out;
    for (const auto& r : records) {
        if (!r.language)
            continue;
        auto& c = out[*r.language];
        c.records++;
        c.cwe_correct += satisfies(r.verdict, CriterionId::CwePe) ? 1 : 0;
        c.label_correct += satisfies(r.verdict, CriterionId::SevLabel) ? 1 : 0;
    }
    return out;
}

std::vector<AccuracyReport> generate_report(std::vector<EvaluatedRecord> records, const ReportOptions& options,
                                            const std::filesystem::path& dir) {
    if (options.criteria.empty())
        throw ConfigError("no evaluation criteria selected");
    if (records.empty())
        throw EmptyEvaluationSet("no evaluated records");
    std::stable_sort(records.begin(), records.end(), [](const EvaluatedRecord& a, const EvaluatedRecord& b) {
        return std::tie(a.variant, a.cve) < std::tie(b.variant, b.cve);
    });

    std::map<PromptVariant, std::vector<EvaluatedRecord>> by_variant;
    for (auto& r : records)
        by_variant[r.variant].push_back(std::move(r));

    std::vector<AccuracyReport> reports;
    json summary = json::array();
    for (const auto& [variant, group] : by_variant) {
        std::vector<Verdict> verdicts;
        for (const auto& r : group)
            verdicts.push_back(r.verdict);
        for (auto c : options.criteria)
            reports.push_back(accuracy(verdicts, c, variant));
        for (auto d : options.extra_distances)
            reports.push_back(distance_accuracy(verdicts, d, variant));

        const std::string vname(to_string(variant));
        json dist = json::object();
        for (const auto& [label, counts] : label_distribution(group))
            dist[label] = {{"ground_truth", counts.ground_truth}, {"identified", counts.identified}};
        write_text_file(dir / ("distribution_" + vname + ".json"), dump_json(dist));

        json langs = json::object();
        for (const auto& [language, counts] : language_breakdown(group))
            langs[language] = {
                {"records", counts.records}, {"cwe_correct", counts.cwe_correct}, {"label_correct", counts.label_correct}};
        write_text_file(dir / ("languages_" + vname + ".json"), dump_json(langs));
    }
    for (const auto& r : reports)
        summary.push_back({{"variant", std::string(to_string(r.variant))},
                           {"criterion", r.criterion},
                           {"numerator", r.numerator},
                           {"denominator", r.denominator},
                           {"accuracy", r.accuracy}});
    write_text_file(dir / "summary.json", dump_json(summary));

    // Criterion rows, variant columns.
    std::vector<std::string> rows;
    for (const auto& r : reports)
        if (std::find(rows.begin(), rows.end(), r.criterion) == rows.end())
            rows.push_back(r.criterion);
    std::string md = "# Evaluation report\n\n| Criterion |";
    for (const auto& [variant, group] : by_variant)
        md += " " + std::string(to_string(variant)) + " |";
    md += "\n|---|";
    for (std::size_t i = 0; i < by_variant.size(); ++i)
        md += "---:|";
    md += "\n";
    for (const auto& row : rows) {
        md += "| " + row + " |";
        for (const auto& [variant, group] : by_variant) {
            for (const auto& r : reports)
                if (r.variant == variant && r.criterion == row)
                    md += " " + fixed3(r.accuracy) + " (" + std::to_string(r.numerator) + "/" +
                          std::to_string(r.denominator) + ") |";
        }
        md += "\n";
    }
    md += "\nRecords per variant:";
    for (const auto& [variant, group] : by_variant)
        md += " " + std::string(to_string(variant)) + "=" + std::to_string(group.size());
    md += "\n";
    write_text_file(dir / "report.md", md);
    return reports;
}

}  // namespace triage::eval
