#include "triage/cvss.hpp"

#include "triage/error.hpp"

#include <algorithm>
#include <set>

namespace triage::cvss {

namespace {

SeverityScore tenths(int t) { return SeverityScore::from_tenths(t); }

CvssScheme v3_scheme(CvssVersion version) {
    return {version,
            {{SeverityLabel::Low, tenths(0), tenths(39)},
             {SeverityLabel::Medium, tenths(40), tenths(69)},
             {SeverityLabel::High, tenths(70), tenths(89)},
             {SeverityLabel::Critical, tenths(90), tenths(100)}}};
}

CvssScheme v2_scheme() {
    return {CvssVersion::V2_0,
            {{SeverityLabel::Low, tenths(0), tenths(39)},
             {SeverityLabel::Medium, tenths(40), tenths(69)},
             {SeverityLabel::High, tenths(70), tenths(100)}}};
}

void require_real_score(SeverityScore score) {
    if (score.is_declined())
        throw SentinelScore("the declined sentinel (-1) has no CVSS band");
}

}  // namespace

void validate(const CvssScheme& scheme) {
    const std::string name = "CVSS " + std::string(to_string(scheme.version));
    if (scheme.bands.empty())
        throw InvalidScheme(name + ": no bands");
    std::set<SeverityLabel> seen;
    int expected_lo = 0;
    for (const auto& band : scheme.bands) {
        if (band.lo.is_declined() || band.hi.is_declined())
            throw InvalidScheme(name + ": band bounds cannot be the sentinel");
        if (!seen.insert(band.label).second)
            throw InvalidScheme(name + ": duplicate label " + std::string(to_string(band.label)));
        if (band.lo.tenths() != expected_lo)
            throw InvalidScheme(name + ": gap or overlap at " + band.lo.str());
        if (band.hi < band.lo)
            throw InvalidScheme(name + ": inverted band " + std::string(to_string(band.label)));
        expected_lo = band.hi.tenths() + 1;
    }
    if (scheme.bands.back().hi.tenths() != 100)
        throw InvalidScheme(name + ": bands must end at 10.0");
}

SchemeStore::SchemeStore() {
    schemes_.emplace(CvssVersion::V2_0, v2_scheme());
    schemes_.emplace(CvssVersion::V3_0, v3_scheme(CvssVersion::V3_0));
    schemes_.emplace(CvssVersion::V3_1, v3_scheme(CvssVersion::V3_1));
}

const SchemeStore& SchemeStore::defaults() {
    static const SchemeStore store;
    return store;
}

void SchemeStore::apply_overrides(const json& bands_by_version) {
    if (!bands_by_version.is_object())
        throw InvalidScheme("cvss_bands must be an object keyed by CVSS version");
    std::map<CvssVersion, CvssScheme> updated = schemes_;
    for (const auto& [key, bands] : bands_by_version.items()) {
        CvssScheme scheme{parse_cvss_version(key), {}};
        if (!bands.is_array())
            throw InvalidScheme("cvss_bands." + key + " must be an array");
        for (const auto& b : bands) {
            try {
                auto label = parse_label(b.at("label").get<std::string>());
                if (!label)
                    throw InvalidScheme("cvss_bands." + key + ": unknown label");
                scheme.bands.push_back(
                    {*label, validate_score(b.at("lo").get<double>()), validate_score(b.at("hi").get<double>())});
            } catch (const json::exception& e) {
                throw InvalidScheme("cvss_bands." + key + ": " + e.what());
            }
        }
        validate(scheme);
        updated[scheme.version] = std::move(scheme);
    }
    schemes_ = std::move(updated);
}

const CvssScheme& SchemeStore::scheme(CvssVersion version) const { return schemes_.at(version); }

CvssVersion select_version(std::span<const CvssVersion> available) {
    if (available.empty())
        return CvssVersion::V3_1;
    return *std::max_element(available.begin(), available.end());
}

SeverityLabel score_to_label(SeverityScore score, CvssVersion version, const SchemeStore& store) {
    require_real_score(score);
    for (const auto& band : store.scheme(version).bands)
        if (band.lo <= score && score <= band.hi)
            return band.label;
    // Unreachable for validated schemes.
    throw InvalidScheme("no band contains " + score.str());
}

ScoreRange label_range(SeverityLabel label, CvssVersion version, const SchemeStore& store) {
    for (const auto& band : store.scheme(version).bands)
        if (band.label == label)
            return {band.lo, band.hi};
    throw LabelNotInScheme(std::string(to_string(label)) + " is not a CVSS " +
                           std::string(to_string(version)) + " label");
}

bool label_in_scheme(SeverityLabel label, CvssVersion version, const SchemeStore& store) {
    const auto& bands = store.scheme(version).bands;
    return std::any_of(bands.begin(), bands.end(), [&](const Band& b) { return b.label == label; });
}

ScoreRange distance_range(SeverityScore score, Distance distance) {
    require_real_score(score);
    int lo = std::max(0, score.tenths() - distance.tenths());
    int hi = std::min(100, score.tenths() + distance.tenths());
    return {SeverityScore::from_tenths(lo), SeverityScore::from_tenths(hi)};
}

bool range_covers(const ScoreRange& range, SeverityScore score) {
    return !score.is_declined() && range.lo <= score && score <= range.hi;
}

}  // namespace triage::cvss
