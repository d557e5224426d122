#include "triage/filters.hpp"

#include "triage/error.hpp"
#include "triage/text.hpp"

#include <algorithm>

namespace triage::filters {

std::string_view to_string(DiscardStage stage) { return stage == DiscardStage::Date ? "DATE" : "VALIDITY"; }

void FilterConfig::validate() const {
    if (!cutoff_date.ok())
        throw ConfigError("cutoff date is not a calendar date");
    if (token_limit == 0)
        throw ConfigError("token limit must be positive");
    if (required_variants.empty())
        throw ConfigError("at least one required variant is needed");
}

std::optional<DiscardRecord> date_check(const EnrichedRecord& record, const FilterConfig& config) {
    auto date = text::parse_date(record.commit_date);
    if (!date || !date->ok())
        return DiscardRecord{record.cve, DiscardStage::Date, std::string(reason::kUnparsableDate)};
    const bool after = std::chrono::sys_days(*date) > std::chrono::sys_days(config.cutoff_date);
    if (after == config.keep_after_cutoff)
        return std::nullopt;
    return DiscardRecord{record.cve, DiscardStage::Date,
                         std::string(after ? reason::kAfterCutoff : reason::kNotAfterCutoff)};
}

// --- ground truth ------------------------------------------------------------

GroundTruth extract_ground_truth(const std::string& cve, const ingest::Cve2CweStore& store) {
    auto it = store.find(cve);
    if (it == store.end())
        throw MissingCve(cve + " is not in the ground-truth store");
    const auto& entry = it->second;

    GroundTruth gt;
    for (const auto& text : entry.cwes)
        if (auto id = parse_cwe_or_unknown(text))
            gt.cwes.insert(*id);
    if (gt.cwes.empty())
        throw EmptyCweGroundTruth(cve + " has no usable CWE");

    // Entries with a version identifier this tool does not know are ignored.
    std::vector<std::pair<CvssVersion, const ingest::CvssEntry*>> versioned;
    const ingest::CvssEntry* versionless = nullptr;
    for (const auto& sev : entry.severities) {
        if (text::trim(sev.version).empty()) {
            if (!versionless)
                versionless = &sev;
            continue;
        }
        try {
            versioned.emplace_back(parse_cvss_version(sev.version), &sev);
        } catch (const UnknownCvssVersion&) {
        }
    }

    const ingest::CvssEntry* chosen = nullptr;
    if (!versioned.empty()) {
        std::vector<CvssVersion> versions;
        for (const auto& [v, _] : versioned)
            versions.push_back(v);
        gt.version = cvss::select_version(versions);
        for (const auto& [v, sev] : versioned)
            if (v == gt.version) {
                chosen = sev;
                break;
            }
    } else if (versionless) {
        gt.version = CvssVersion::V3_1;
        chosen = versionless;
    }
    if (!chosen)
        throw MissingSeverityForVersion(cve + " has no severity");

    auto label = parse_label(text::to_upper(text::trim(chosen->label)));
    if (!label)
        throw MissingSeverityForVersion(cve + " has no severity label for CVSS " +
                                        std::string(to_string(gt.version)));
    if (!chosen->score)
        throw MissingSeverityForVersion(cve + " has no score for CVSS " + std::string(to_string(gt.version)));
    gt.label = *label;
    gt.score = validate_score(*chosen->score, gt.version);
    if (gt.score.is_declined())
        throw MissingSeverityForVersion(cve + " has a placeholder score");
    validate(gt);
    return gt;
}

// --- validity ----------------------------------------------------------------

namespace {

DiscardRecord validity_discard(const EnrichedRecord& record, std::string_view why) {
    return {record.cve, DiscardStage::Validity, std::string(why)};
}

std::optional<std::string_view> ground_truth_problem(const EnrichedRecord& record, const ingest::Cve2CweStore& store,
                                                     std::optional<GroundTruth>& out) {
    try {
        out = extract_ground_truth(record.cve, store);
        return std::nullopt;
    } catch (const MissingCve&) {
        return reason::kMissingGroundTruth;
    } catch (const EmptyCweGroundTruth&) {
        return reason::kEmptyCwe;
    } catch (const MalformedCweId&) {
        return reason::kMalformedCwe;
    } catch (const MissingSeverityForVersion&) {
        return reason::kMissingSeverity;
    } catch (const ScoreOutOfRange&) {
        return reason::kInvalidSeverity;
    } catch (const MalformedRecord&) {
        return reason::kInvalidSeverity;
    }
}

bool languages_supported(const EnrichedRecord& record, const FilterConfig& config) {
    std::set<std::string> changed;
    for (const auto& f : record.files)
        changed.insert(f.filename);
    for (const auto& h : record.hunks)
        changed.insert(h.filename);
    bool any_code = false;
    for (const auto& name : changed) {
        auto language = extract::detect_language(name, config.extensions);
        if (language && config.supported_languages.contains(*language)) {
            any_code = true;
            continue;
        }
        if (language || !extract::is_non_code_file(name))
            return false;
    }
    return any_code;
}

}  // namespace

ValidityResult validity_check(const EnrichedRecord& record, const ingest::Cve2CweStore& store,
                              const FilterConfig& config, const PromptContext& context) {
    ValidityResult result;

    // (i) ground truth
    if (auto problem = ground_truth_problem(record, store, result.ground_truth)) {
        result.discard = validity_discard(record, *problem);
        return result;
    }

    // (ii) code and hunks
    const bool has_code = std::any_of(record.files.begin(), record.files.end(),
                                      [](const BuggyFile& f) { return !f.content.empty(); });
    if (!has_code) {
        result.discard = validity_discard(record, reason::kEmptyCode);
        return result;
    }
    if (record.hunks.empty()) {
        result.discard = validity_discard(record, reason::kNoHunks);
        return result;
    }

    // (iii) languages
    if (!languages_supported(record, config)) {
        result.discard = validity_discard(record, reason::kUnsupportedLanguage);
        return result;
    }

    // (iv) prompt size per required variant, over both tasks
    for (auto variant : config.required_variants) {
        std::size_t largest = 0;
        try {
            for (auto task : {TaskKind::Cwe, TaskKind::Severity}) {
                auto pair = prompt::build_prompt_pair(record, task, variant, result.ground_truth->version,
                                                      *context.templates, *context.schemes);
                largest = std::max(largest, prompt::pair_tokens(pair, context.estimator));
            }
        } catch (const MissingGranularity&) {
            result.excluded[variant] = std::string(reason::kMissingGranularity);
            continue;
        }
        if (largest > config.token_limit)
            result.excluded[variant] = std::string(reason::kTokenLimit);
        else
            result.variants.push_back(variant);
    }

    const bool any_oversized = std::any_of(result.excluded.begin(), result.excluded.end(),
                                           [](const auto& e) { return e.second == reason::kTokenLimit; });
    if ((config.token_scope == TokenScope::Record && any_oversized) || result.variants.empty()) {
        std::string why = any_oversized ? std::string(reason::kTokenLimit) : result.excluded.begin()->second;
        result.discard = validity_discard(record, why);
    }
    return result;
}

FilterOutcome run_filters(const std::vector<EnrichedRecord>& records, const ingest::Cve2CweStore& store,
                          const FilterConfig& config, const PromptContext& context) {
    config.validate();
    FilterOutcome out;
    for (const auto& record : records) {
        if (auto d = date_check(record, config)) {
            out.discarded.push_back(std::move(*d));
            continue;
        }
        auto v = validity_check(record, store, config, context);
        if (v.discard) {
            out.discarded.push_back(std::move(*v.discard));
            continue;
        }
        out.passed.push_back({record, *v.ground_truth, std::move(v.variants), std::move(v.excluded)});
    }
    std::stable_sort(out.discarded.begin(), out.discarded.end(),
                     [](const DiscardRecord& a, const DiscardRecord& b) { return a.cve < b.cve; });
    return out;
}

json non_evaluated_report(std::vector<DiscardRecord> discards) {
    std::stable_sort(discards.begin(), discards.end(),
                     [](const DiscardRecord& a, const DiscardRecord& b) { return a.cve < b.cve; });
    json arr = json::array();
    for (const auto& d : discards)
        arr.push_back({{"cve", d.cve}, {"stage", std::string(to_string(d.stage))}, {"reason", d.reason}});
    return arr;
}

std::vector<DiscardRecord> read_non_evaluated_report(const json& doc) {
    if (!doc.is_array())
        throw MalformedRecord("non-evaluated report must be a JSON array");
    std::vector<DiscardRecord> out;
    for (const auto& j : doc) {
        DiscardRecord d;
        d.cve = j.at("cve").get<std::string>();
        auto stage = j.at("stage").get<std::string>();
        if (stage == "DATE")
            d.stage = DiscardStage::Date;
        else if (stage == "VALIDITY")
            d.stage = DiscardStage::Validity;
        else
            throw MalformedRecord("unknown discard stage " + stage);
        d.reason = j.at("reason").get<std::string>();
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace triage::filters
