#pragma once

#include "triage/json_io.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace triage::ingest {

struct CvssEntry {
    std::string version;  // as written in the source, e.g. "3.1" or "cvssMetricV31"
    std::string label;
    std::optional<double> score;

    friend bool operator==(const CvssEntry&, const CvssEntry&) = default;
};

struct RawCveEntry {
    std::string cve;
    std::string description;
    std::vector<std::string> reference_urls;
    std::vector<std::string> cwe_texts;
    std::vector<CvssEntry> cvss_entries;
};

/// Parses an NVD JSON document. Both the legacy 1.1 data feeds ("CVE_Items")
/// and the 2.0 API shape ("vulnerabilities") are accepted. Missing fields
/// become empty values; only malformed documents throw FeedSyntaxError.
std::vector<RawCveEntry> parse_nvd_feed(std::string_view bytes);

/// Ground-truth source keyed by CVE id.
struct Cve2CweEntry {
    std::string cve;
    std::vector<std::string> cwes;
    std::vector<CvssEntry> severities;  // version may be empty (unspecified)
};

using Cve2CweStore = std::map<std::string, Cve2CweEntry>;

/// Reads `{"CVE-...": {"cwes": [...], "severities": [{"version", "label", "score"}]}}`.
Cve2CweStore parse_cve2cwe(const json& document);
json cve2cwe_to_json(const Cve2CweStore& store);

/// Derives a ground-truth store from feed entries (CWEs and CVSS metrics as published).
Cve2CweStore cve2cwe_from_feed(const std::vector<RawCveEntry>& entries);

}  // namespace triage::ingest
