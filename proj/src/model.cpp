#include "triage/model.hpp"

#include "triage/error.hpp"
#include "triage/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>

namespace triage {

// --- CweId -----------------------------------------------------------------

CweId::CweId(std::uint32_t id) : id_(id) {
    if (id == 0)
        throw MalformedCweId("CWE ids start at 1");
}

CweId CweId::parse(std::string_view text) {
    std::string_view digits = text::trim(text);
    if (text::starts_with_icase(digits, "CWE-"))
        digits.remove_prefix(4);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](unsigned char c) { return c >= '0' && c <= '9'; }))
        throw MalformedCweId("malformed CWE id: '" + std::string(text) + "'");
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
        throw MalformedCweId("CWE id out of range: '" + std::string(text) + "'");
    if (value == 0)
        throw MalformedCweId("CWE ids start at 1: '" + std::string(text) + "'");
    return CweId(value);
}

std::string CweId::str() const { return "CWE-" + std::to_string(id_); }

std::optional<CweId> parse_cwe_or_unknown(std::string_view text) {
    auto t = text::trim(text);
    if (t.empty() || text::starts_with_icase(t, "NVD-CWE-") || text::to_lower(t) == "unknown")
        return std::nullopt;
    return CweId::parse(t);
}

bool is_subset(const CweSet& a, const CweSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool intersects(const CweSet& a, const CweSet& b) {
    return std::any_of(a.begin(), a.end(), [&](const CweId& id) { return b.contains(id); });
}

// --- labels, versions ------------------------------------------------------

std::string_view to_string(SeverityLabel label) {
    switch (label) {
    case SeverityLabel::Low: return "LOW";
    case SeverityLabel::Medium: return "MEDIUM";
    case SeverityLabel::High: return "HIGH";
    case SeverityLabel::Critical: return "CRITICAL";
    }
    return "?";
}

std::optional<SeverityLabel> parse_label(std::string_view text) {
    for (auto label : kAllLabels)
        if (to_string(label) == text)
            return label;
    return std::nullopt;
}

std::string_view to_string(CvssVersion version) {
    switch (version) {
    case CvssVersion::V2_0: return "2.0";
    case CvssVersion::V3_0: return "3.0";
    case CvssVersion::V3_1: return "3.1";
    }
    return "?";
}

CvssVersion parse_cvss_version(std::string_view text) {
    std::string t = text::to_lower(text::trim(text));
    for (std::string_view prefix : {"cvssmetricv", "basemetricv", "cvss:", "cvssv", "v"}) {
        if (t.starts_with(prefix)) {
            t.erase(0, prefix.size());
            break;
        }
    }
    if (t == "2" || t == "2.0" || t == "20")
        return CvssVersion::V2_0;
    if (t == "3.0" || t == "30")
        return CvssVersion::V3_0;
    if (t == "3.1" || t == "31")
        return CvssVersion::V3_1;
    throw UnknownCvssVersion("unknown CVSS version: '" + std::string(text) + "'");
}

// --- scores ----------------------------------------------------------------

SeverityScore SeverityScore::from_tenths(int tenths) {
    if (tenths != kDeclinedTenths && (tenths < 0 || tenths > 100))
        throw ScoreOutOfRange("severity score out of range: " + std::to_string(tenths / 10.0));
    return SeverityScore(tenths);
}

std::string SeverityScore::str() const {
    if (is_declined())
        return "-1";
    return std::to_string(tenths_ / 10) + "." + std::to_string(tenths_ % 10);
}

SeverityScore validate_score(double number, CvssVersion /*version*/) {
    if (!std::isfinite(number))
        throw ScoreOutOfRange("severity score is not finite");
    if (number == -1.0)
        return SeverityScore::declined();
    if (number < 0.0 || number > 10.0)
        throw ScoreOutOfRange("severity score out of range [0, 10]: " + std::to_string(number));
    // The epsilon absorbs binary representation error (2.45 is stored as 2.4499999...).
    double rounded = std::round(number * 10.0 + 1e-9);
    return SeverityScore::from_tenths(static_cast<int>(rounded));
}

// --- variants, tasks -------------------------------------------------------

std::string_view to_string(PromptVariant variant) {
    switch (variant) {
    case PromptVariant::Description: return "DESCRIPTION";
    case PromptVariant::DescriptionFiles: return "DESCRIPTION_FILES";
    case PromptVariant::DescriptionMethods: return "DESCRIPTION_METHODS";
    case PromptVariant::DescriptionHunks: return "DESCRIPTION_HUNKS";
    case PromptVariant::FilesOnly: return "FILES_ONLY";
    case PromptVariant::MethodsOnly: return "METHODS_ONLY";
    case PromptVariant::HunksOnly: return "HUNKS_ONLY";
    }
    return "?";
}

std::optional<PromptVariant> parse_variant(std::string_view text) {
    std::string upper(text::trim(text));
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::toupper(c));
    });
    for (auto v : kAllVariants)
        if (to_string(v) == upper)
            return v;
    return std::nullopt;
}

bool includes_description(PromptVariant variant) {
    switch (variant) {
    case PromptVariant::FilesOnly:
    case PromptVariant::MethodsOnly:
    case PromptVariant::HunksOnly: return false;
    default: return true;
    }
}

Granularity granularity_of(PromptVariant variant) {
    switch (variant) {
    case PromptVariant::Description: return Granularity::None;
    case PromptVariant::DescriptionFiles:
    case PromptVariant::FilesOnly: return Granularity::Files;
    case PromptVariant::DescriptionMethods:
    case PromptVariant::MethodsOnly: return Granularity::Methods;
    case PromptVariant::DescriptionHunks:
    case PromptVariant::HunksOnly: return Granularity::Hunks;
    }
    return Granularity::None;
}

std::string_view to_string(TaskKind task) { return task == TaskKind::Cwe ? "CWE" : "SEVERITY"; }

std::optional<TaskKind> parse_task(std::string_view text) {
    auto t = text::to_lower(text::trim(text));
    if (t == "cwe")
        return TaskKind::Cwe;
    if (t == "severity")
        return TaskKind::Severity;
    return std::nullopt;
}

// --- records ---------------------------------------------------------------

bool is_valid_cve_id(std::string_view cve) {
    static const std::regex pattern(R"(CVE-\d{4}-\d{4,})");
    return std::regex_match(cve.begin(), cve.end(), pattern);
}

void validate(const BuggyFile& file) {
    auto lines = static_cast<int>(text::line_count(file.content));
    int previous = 0;
    for (const auto& line : file.buggy_lines) {
        if (line.line_number <= previous)
            throw MalformedRecord(file.filename + ": buggy line numbers must be strictly increasing");
        if (line.line_number > lines)
            throw MalformedRecord(file.filename + ": buggy line " + std::to_string(line.line_number) +
                                  " beyond end of content");
        previous = line.line_number;
    }
}

void validate(const MethodSnippet& method, const BuggyFile& file) {
    if (method.start_line < 1 || method.end_line < method.start_line)
        throw MalformedRecord(method.filename + ": invalid method span");
    if (method.body != text::slice_lines(file.content, method.start_line, method.end_line))
        throw MalformedRecord(method.filename + ": method body differs from content slice");
}

void validate(const EnrichedRecord& record) {
    if (!is_valid_cve_id(record.cve))
        throw MalformedRecord("invalid CVE id: '" + record.cve + "'");
    auto find_file = [&](const std::string& name) -> const BuggyFile* {
        for (const auto& f : record.files)
            if (f.filename == name)
                return &f;
        return nullptr;
    };
    for (const auto& f : record.files)
        validate(f);
    for (const auto& h : record.hunks) {
        if (!find_file(h.filename))
            throw MalformedRecord(record.cve + ": hunk references unknown file " + h.filename);
        if (h.deleted_lines.empty() && h.added_lines.empty())
            throw MalformedRecord(record.cve + ": empty hunk in " + h.filename);
    }
    for (const auto& m : record.methods) {
        const BuggyFile* f = find_file(m.filename);
        if (!f)
            throw MalformedRecord(record.cve + ": method references unknown file " + m.filename);
        validate(m, *f);
    }
}

void validate(const GroundTruth& gt) {
    if (gt.cwes.empty())
        throw MalformedRecord("ground truth has no CWEs");
    if (gt.score.is_declined())
        throw MalformedRecord("ground truth score cannot be the declined sentinel");
    if (gt.version == CvssVersion::V2_0 && gt.label == SeverityLabel::Critical)
        throw MalformedRecord("CRITICAL is not a CVSS v2.0 label");
}

void validate(const InferenceOutcome& outcome) {
    if (outcome.top_cwes.size() > kMaxTopCandidates)
        throw FormatViolation("more than five top candidate CWEs");
    if (!is_subset(outcome.exact_cwes, outcome.top_cwes))
        throw FormatViolation("exact CWEs are not a subset of the top candidates");
}

std::string_view to_string(CweStatus status) {
    switch (status) {
    case CweStatus::Equal: return "EQUAL";
    case CweStatus::SubsetEqual: return "SUBSET_EQUAL";
    case CweStatus::Overlapped: return "OVERLAPPED";
    case CweStatus::NonOverlapped: return "NON_OVERLAPPED";
    }
    return "?";
}

// --- distances -------------------------------------------------------------

Distance Distance::from_tenths(int tenths) {
    if (tenths <= 0)
        throw ConfigError("score distance must be positive");
    return Distance(tenths);
}

Distance Distance::from_value(double value) {
    if (!std::isfinite(value) || value <= 0)
        throw ConfigError("score distance must be positive");
    double scaled = value * 10.0;
    double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-6)
        throw ConfigError("score distance must be a multiple of 0.1: " + std::to_string(value));
    return from_tenths(static_cast<int>(rounded));
}

std::string Distance::str() const {
    return std::to_string(tenths_ / 10) + "." + std::to_string(tenths_ % 10);
}

bool Verdict::distance_ok(Distance d) const {
    auto it = score_distance.find(d);
    return it != score_distance.end() && it->second;
}

}  // namespace triage
