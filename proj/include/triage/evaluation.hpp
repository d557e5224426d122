#pragma once

// Per-record verdicts, accuracy per criterion, label distributions,
// per-language counts and the report bundle.

#include "triage/cvss.hpp"
#include "triage/extraction.hpp"
#include "triage/json_io.hpp"
#include "triage/model.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace triage::eval {

enum class CriterionId {
    CwePe,
    CwePc,
    CweGc,
    CweTopPc,
    CweTopGc,
    SevLabel,
    SevScoreExact,
    SevScoreLabelRange,
    SevScoreDist05,
    SevScoreDist10,
    SevScoreDist15,
    TotalPmLabel,
    TotalPmLabelRange,
    TotalPmDist,
};

inline constexpr std::array<CriterionId, 14> kAllCriteria = {
    CriterionId::CwePe,          CriterionId::CwePc,           CriterionId::CweGc,
    CriterionId::CweTopPc,       CriterionId::CweTopGc,        CriterionId::SevLabel,
    CriterionId::SevScoreExact,  CriterionId::SevScoreLabelRange, CriterionId::SevScoreDist05,
    CriterionId::SevScoreDist10, CriterionId::SevScoreDist15,  CriterionId::TotalPmLabel,
    CriterionId::TotalPmLabelRange, CriterionId::TotalPmDist};

std::string_view to_string(CriterionId id);  // "CWE_PE", ...
std::optional<CriterionId> parse_criterion(std::string_view text);

/// Distance used by TOTAL_PM_DIST.
inline const Distance kTotalDistance = Distance::from_tenths(15);

/// Status of identified vs ground-truth sets. An empty identified set is
/// NON_OVERLAPPED with both flags false, so a decline never counts as covered.
CweRelation classify_cwe_status(const CweSet& identified, const CweSet& gt);

/// Verdict for one outcome; the standard distances are always evaluated,
/// `extra_distances` in addition.
Verdict eval_record(const InferenceOutcome& outcome, const GroundTruth& gt,
                    const std::vector<Distance>& extra_distances = {},
                    const cvss::SchemeStore& schemes = cvss::SchemeStore::defaults());

bool satisfies(const Verdict& verdict, CriterionId criterion);

struct AccuracyReport {
    PromptVariant variant = PromptVariant::Description;
    std::string criterion;  // criterion name, or SEV_SCORE_DIST_<d> for extra distances
    std::size_t numerator = 0;
    std::size_t denominator = 0;
    double accuracy = 0.0;
};

/// Throws EmptyEvaluationSet when `verdicts` is empty.
AccuracyReport accuracy(const std::vector<Verdict>& verdicts, CriterionId criterion, PromptVariant variant);
AccuracyReport distance_accuracy(const std::vector<Verdict>& verdicts, Distance distance, PromptVariant variant);

struct LabelCounts {
    std::size_t ground_truth = 0;
    std::size_t identified = 0;
};

/// Keys LOW, MEDIUM, HIGH, CRITICAL and NULL (declines); every key is present.
using LabelDistribution = std::map<std::string, LabelCounts>;

struct EvaluatedRecord {
    std::string cve;
    PromptVariant variant = PromptVariant::Description;
    GroundTruth ground_truth;
    InferenceOutcome outcome;
    Verdict verdict;
    std::optional<std::string> language;  // dominant language, when known
};

LabelDistribution label_distribution(const std::vector<EvaluatedRecord>& records);

struct LanguageCounts {
    std::size_t records = 0;
    std::size_t cwe_correct = 0;    // CWE_PE
    std::size_t label_correct = 0;  // SEV_LABEL
};

/// Language of the file with the most buggy lines (first such file on ties);
/// nullopt when no file has a supported language.
std::optional<extract::LanguageId> dominant_language(const EnrichedRecord& record,
                                                     const extract::ExtensionTable& table = extract::default_extensions());

/// Records without a language are left out.
std::map<std::string, LanguageCounts> language_breakdown(const std::vector<EvaluatedRecord>& records);

struct ReportOptions {
    std::vector<CriterionId> criteria{kAllCriteria.begin(), kAllCriteria.end()};
    std::vector<Distance> extra_distances;  // reported as SEV_SCORE_DIST_<d>
};

/// Writes summary.json, distribution_<VARIANT>.json, languages_<VARIANT>.json
/// and report.md into `dir`. Records are grouped by variant and ordered by CVE.
/// Throws ConfigError for an empty criterion list, EmptyEvaluationSet when
/// there are no records, IoError on write failures.
std::vector<AccuracyReport> generate_report(std::vector<EvaluatedRecord> records, const ReportOptions& options,
                                            const std::filesystem::path& dir);

}  // namespace triage::eval
