#pragma once

// CVSS qualitative rating tables and the score arithmetic the evaluator needs.

#include "triage/json_io.hpp"
#include "triage/model.hpp"

#include <map>
#include <span>
#include <vector>

namespace triage::cvss {

/// Inclusive score interval, 0.0 ≤ lo ≤ hi ≤ 10.0.
struct ScoreRange {
    SeverityScore lo;
    SeverityScore hi;

    friend bool operator==(const ScoreRange&, const ScoreRange&) = default;
};

struct Band {
    SeverityLabel label;
    SeverityScore lo;
    SeverityScore hi;
};

struct CvssScheme {
    CvssVersion version;
    std::vector<Band> bands;  // ascending, partitioning [0.0, 10.0]
};

/// Throws InvalidScheme unless the bands partition [0.0, 10.0] on the 0.1 grid
/// with distinct labels.
void validate(const CvssScheme& scheme);

/// Per-version tables. Defaults follow the public CVSS v2.0 and v3.x rating
/// tables with the v3 "None" rating (0.0) folded into LOW.
class SchemeStore {
public:
    SchemeStore();

    static const SchemeStore& defaults();

    /// Reads `{"2.0": [{"label": "LOW", "lo": 0.0, "hi": 3.9}, ...], ...}`.
    /// Versions absent from the object keep their current table.
    void apply_overrides(const json& bands_by_version);

    const CvssScheme& scheme(CvssVersion version) const;

private:
    std::map<CvssVersion, CvssScheme> schemes_;
};

/// Latest version in the list; v3.1 when the list is empty.
CvssVersion select_version(std::span<const CvssVersion> available);

/// Throws SentinelScore for -1.
SeverityLabel score_to_label(SeverityScore score, CvssVersion version,
                             const SchemeStore& store = SchemeStore::defaults());

/// Throws LabelNotInScheme (CRITICAL under v2.0).
ScoreRange label_range(SeverityLabel label, CvssVersion version,
                       const SchemeStore& store = SchemeStore::defaults());

bool label_in_scheme(SeverityLabel label, CvssVersion version,
                     const SchemeStore& store = SchemeStore::defaults());

/// [max(0, score - d), min(10, score + d)]. Throws SentinelScore for -1.
ScoreRange distance_range(SeverityScore score, Distance distance);

/// Inclusive on both ends.
bool range_covers(const ScoreRange& range, SeverityScore score);

}  // namespace triage::cvss
