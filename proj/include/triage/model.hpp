#pragma once

// Shared domain vocabulary: CVE records enriched with buggy code, ground truth,
// model outcomes and per-record verdicts.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

// ---------------------------------------------------------------------------
// CWE identifiers
// ---------------------------------------------------------------------------

class CweId {
public:
    /// Accepts "CWE-79", "cwe-79" and "79". Ids start at 1.
    static CweId parse(std::string_view text);

    explicit CweId(std::uint32_t id);

    std::uint32_t value() const noexcept { return id_; }
    std::string str() const;  // "CWE-<n>"

    friend auto operator<=>(const CweId&, const CweId&) = default;

private:
    std::uint32_t id_;
};

using CweSet = std::set<CweId>;

/// Parses a CWE text, returning nullopt for NVD placeholders such as
/// "NVD-CWE-Other" / "NVD-CWE-noinfo" that name no concrete weakness.
/// Anything else that is malformed still throws MalformedCweId.
std::optional<CweId> parse_cwe_or_unknown(std::string_view text);

bool is_subset(const CweSet& a, const CweSet& b);  // a ⊆ b
bool intersects(const CweSet& a, const CweSet& b);

// ---------------------------------------------------------------------------
// Severity
// ---------------------------------------------------------------------------

enum class SeverityLabel { Low, Medium, High, Critical };

inline constexpr std::array<SeverityLabel, 4> kAllLabels = {
    SeverityLabel::Low, SeverityLabel::Medium, SeverityLabel::High, SeverityLabel::Critical};

std::string_view to_string(SeverityLabel label);
/// Case-sensitive: only "LOW", "MEDIUM", "HIGH", "CRITICAL" are accepted.
std::optional<SeverityLabel> parse_label(std::string_view text);

enum class CvssVersion { V2_0, V3_0, V3_1 };

inline constexpr std::array<CvssVersion, 3> kAllVersions = {
    CvssVersion::V2_0, CvssVersion::V3_0, CvssVersion::V3_1};

std::string_view to_string(CvssVersion version);  // "2.0", "3.0", "3.1"
/// Normalizes "3.1", "V3.1", "v3.1", "CVSS:3.1", "cvssMetricV31", "baseMetricV2".
/// Throws UnknownCvssVersion for anything else.
CvssVersion parse_cvss_version(std::string_view text);

/// A CVSS base score held in tenths, so one-decimal equality is exact.
/// The value -1 is the "model declined" sentinel.
class SeverityScore {
public:
    static constexpr int kDeclinedTenths = -10;

    static SeverityScore from_tenths(int tenths);
    static SeverityScore declined() { return SeverityScore(kDeclinedTenths); }

    int tenths() const noexcept { return tenths_; }
    double value() const noexcept { return tenths_ / 10.0; }
    bool is_declined() const noexcept { return tenths_ == kDeclinedTenths; }

    /// "9.2", "10.0", or "-1" for the sentinel.
    std::string str() const;

    friend auto operator<=>(const SeverityScore&, const SeverityScore&) = default;

private:
    explicit SeverityScore(int tenths) : tenths_(tenths) {}
    int tenths_;
};

/// Rounds to one fractional digit (half away from zero) and range-checks.
/// -1 passes through as the declined sentinel.
SeverityScore validate_score(double number, CvssVersion version = CvssVersion::V3_1);

// ---------------------------------------------------------------------------
// Prompt variants and tasks
// ---------------------------------------------------------------------------

enum class PromptVariant {
    Description,
    DescriptionFiles,
    DescriptionMethods,
    DescriptionHunks,
    FilesOnly,
    MethodsOnly,
    HunksOnly,
};

inline constexpr std::array<PromptVariant, 7> kAllVariants = {
    PromptVariant::Description,      PromptVariant::DescriptionFiles,
    PromptVariant::DescriptionMethods, PromptVariant::DescriptionHunks,
    PromptVariant::FilesOnly,        PromptVariant::MethodsOnly,
    PromptVariant::HunksOnly,
};

inline constexpr std::array<PromptVariant, 4> kEvaluationVariants = {
    PromptVariant::Description, PromptVariant::DescriptionFiles,
    PromptVariant::DescriptionMethods, PromptVariant::DescriptionHunks,
};

std::string_view to_string(PromptVariant variant);  // "DESCRIPTION", "DESCRIPTION_FILES", ...
std::optional<PromptVariant> parse_variant(std::string_view text);

enum class Granularity { None, Files, Methods, Hunks };

bool includes_description(PromptVariant variant);
Granularity granularity_of(PromptVariant variant);

enum class TaskKind { Cwe, Severity };

std::string_view to_string(TaskKind task);  // "CWE", "SEVERITY"
std::optional<TaskKind> parse_task(std::string_view text);

// ---------------------------------------------------------------------------
// Code at three granularities
// ---------------------------------------------------------------------------

struct NumberedLine {
    int line_number = 0;  // 1-based
    std::string text;

    friend bool operator==(const NumberedLine&, const NumberedLine&) = default;
};

struct BuggyFile {
    std::string filename;
    std::string content;  // pre-change full text
    std::vector<NumberedLine> buggy_lines;

    friend bool operator==(const BuggyFile&, const BuggyFile&) = default;
};

struct Hunk {
    std::string filename;
    std::string header;  // "@@ -a,b +c,d @@ ..."
    std::vector<NumberedLine> deleted_lines;  // pre-image numbering
    std::vector<NumberedLine> added_lines;    // post-image numbering

    friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct MethodSnippet {
    std::string filename;
    std::string language;
    std::string method_name;  // empty for anonymous functions
    int start_line = 0;
    int end_line = 0;
    std::string body;

    friend bool operator==(const MethodSnippet&, const MethodSnippet&) = default;
};

struct EnrichedRecord {
    std::string cve;
    std::string description;
    std::string url;
    std::string commit_date;  // as published by the commit host; parsed by the date filter
    std::optional<std::string> github_description;
    std::vector<BuggyFile> files;
    std::vector<Hunk> hunks;
    std::vector<MethodSnippet> methods;

    friend bool operator==(const EnrichedRecord&, const EnrichedRecord&) = default;
};

bool is_valid_cve_id(std::string_view cve);

/// Checks the structural invariants of a record; throws MalformedRecord.
void validate(const EnrichedRecord& record);
void validate(const BuggyFile& file);
void validate(const MethodSnippet& method, const BuggyFile& file);

// ---------------------------------------------------------------------------
// Ground truth, outcomes, verdicts
// ---------------------------------------------------------------------------

struct GroundTruth {
    CweSet cwes;
    SeverityLabel label = SeverityLabel::Low;
    SeverityScore score = SeverityScore::from_tenths(0);
    CvssVersion version = CvssVersion::V3_1;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Throws MalformedRecord when cwes is empty, the score is the sentinel or the
/// label does not exist under the version's scheme (CRITICAL under v2.0).
void validate(const GroundTruth& gt);

inline constexpr std::size_t kMaxTopCandidates = 5;

struct InferenceOutcome {
    CweSet exact_cwes;
    CweSet top_cwes;
    std::optional<SeverityLabel> label;
    SeverityScore score = SeverityScore::declined();
    std::string raw_text_cwe;
    std::string raw_text_severity;
};

/// exact ⊆ top and |top| ≤ 5, otherwise FormatViolation.
void validate(const InferenceOutcome& outcome);

enum class CweStatus { Equal, SubsetEqual, Overlapped, NonOverlapped };

std::string_view to_string(CweStatus status);

struct CweRelation {
    CweStatus status = CweStatus::NonOverlapped;
    bool identified_in_gt = false;  // identified ⊆ ground truth
    bool gt_in_identified = false;  // ground truth ⊆ identified

    friend bool operator==(const CweRelation&, const CweRelation&) = default;
};

/// A score distance, in tenths (0.5 -> 5).
class Distance {
public:
    static Distance from_tenths(int tenths);
    /// Accepts positive values on the 0.1 grid; throws ConfigError otherwise.
    static Distance from_value(double value);

    int tenths() const noexcept { return tenths_; }
    double value() const noexcept { return tenths_ / 10.0; }
    std::string str() const;

    friend auto operator<=>(const Distance&, const Distance&) = default;

private:
    explicit Distance(int tenths) : tenths_(tenths) {}
    int tenths_;
};

inline const std::array<Distance, 3> kStandardDistances = {
    Distance::from_tenths(5), Distance::from_tenths(10), Distance::from_tenths(15)};

struct Verdict {
    CweRelation exact;
    CweRelation top;
    bool label_match = false;
    bool score_exact = false;
    bool score_label_range = false;
    std::map<Distance, bool> score_distance;

    bool distance_ok(Distance d) const;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

}  // namespace triage
