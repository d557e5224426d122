#pragma once

// Date and validity filters plus ground-truth extraction. Every rejected
// record yields a DiscardRecord with a machine-readable reason.

#include "triage/extraction.hpp"
#include "triage/nvd.hpp"
#include "triage/prompting.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace triage::filters {

enum class DiscardStage { Date, Validity };
std::string_view to_string(DiscardStage stage);  // "DATE" / "VALIDITY"

struct DiscardRecord {
    std::string cve;
    DiscardStage stage = DiscardStage::Validity;
    std::string reason;

    friend bool operator==(const DiscardRecord&, const DiscardRecord&) = default;
};

/// Reason codes.
namespace reason {
inline constexpr std::string_view kNotAfterCutoff = "not-after-cutoff";
inline constexpr std::string_view kAfterCutoff = "after-cutoff";
inline constexpr std::string_view kUnparsableDate = "unparsable-date";
inline constexpr std::string_view kMissingGroundTruth = "missing-ground-truth";
inline constexpr std::string_view kMalformedCwe = "malformed-cwe";
inline constexpr std::string_view kEmptyCwe = "empty-cwe";
inline constexpr std::string_view kMissingSeverity = "missing-severity";
inline constexpr std::string_view kInvalidSeverity = "invalid-severity";
inline constexpr std::string_view kEmptyCode = "empty-code";
inline constexpr std::string_view kNoHunks = "no-hunks";
inline constexpr std::string_view kUnsupportedLanguage = "unsupported-language";
inline constexpr std::string_view kTokenLimit = "token-limit";
inline constexpr std::string_view kMissingGranularity = "missing-granularity";
inline constexpr std::string_view kNoCommitUrl = "no-commit-url";
inline constexpr std::string_view kFetchFailed = "fetch-failed";
}  // namespace reason

/// How an oversized prompt is handled: drop only that variant of the record,
/// or drop the whole record.
enum class TokenScope { Variant, Record };

struct FilterConfig {
    std::chrono::year_month_day cutoff_date{std::chrono::year{2021}, std::chrono::month{9}, std::chrono::day{1}};
    bool keep_after_cutoff = true;
    std::size_t token_limit = 4096;
    std::set<extract::LanguageId> supported_languages{extract::kAllLanguages.begin(), extract::kAllLanguages.end()};
    std::vector<PromptVariant> required_variants{kEvaluationVariants.begin(), kEvaluationVariants.end()};
    TokenScope token_scope = TokenScope::Variant;
    extract::ExtensionTable extensions = extract::default_extensions();

    /// Throws ConfigError.
    void validate() const;
};

/// nullopt means the record passes.
std::optional<DiscardRecord> date_check(const EnrichedRecord& record, const FilterConfig& config);

/// Latest listed CVSS version wins; a severity without a version counts as
/// v3.1 when no versioned one exists. Throws MissingCve,
/// MissingSeverityForVersion (label or score absent), MalformedCweId,
/// EmptyCweGroundTruth, ScoreOutOfRange, or MalformedRecord (label outside
/// the version's scheme).
GroundTruth extract_ground_truth(const std::string& cve, const ingest::Cve2CweStore& store);

struct PromptContext {
    const prompt::TemplateSet* templates = &prompt::TemplateSet::builtin();
    const cvss::SchemeStore* schemes = &cvss::SchemeStore::defaults();
    prompt::TokenEstimator estimator = prompt::estimate_tokens;
};

struct ValidityResult {
    std::optional<DiscardRecord> discard;
    std::optional<GroundTruth> ground_truth;
    std::vector<PromptVariant> variants;                // required variants that fit
    std::map<PromptVariant, std::string> excluded;      // required variants that do not, with reason
};

/// Conditions in fixed order: (i) ground truth, (ii) code and hunks,
/// (iii) languages, (iv) prompt size of each required variant for both tasks.
/// The first failing condition names the reason.
ValidityResult validity_check(const EnrichedRecord& record, const ingest::Cve2CweStore& store,
                              const FilterConfig& config, const PromptContext& context = {});

struct PassedRecord {
    EnrichedRecord record;
    GroundTruth ground_truth;
    std::vector<PromptVariant> variants;
    std::map<PromptVariant, std::string> excluded;
};

struct FilterOutcome {
    std::vector<PassedRecord> passed;    // input order
    std::vector<DiscardRecord> discarded;  // sorted by CVE id
};

FilterOutcome run_filters(const std::vector<EnrichedRecord>& records, const ingest::Cve2CweStore& store,
                          const FilterConfig& config, const PromptContext& context = {});

/// JSON array sorted by CVE id: `[{"cve", "stage", "reason"}, ...]`.
json non_evaluated_report(std::vector<DiscardRecord> discards);
std::vector<DiscardRecord> read_non_evaluated_report(const json& doc);

}  // namespace triage::filters
