#include "triage/nvd.hpp"

#include "triage/error.hpp"

namespace triage::ingest {

namespace {

const json* path(const json& j, std::initializer_list<const char*> keys) {
    const json* cur = &j;
    for (const char* key : keys) {
        if (!cur->is_object())
            return nullptr;
        auto it = cur->find(key);
        if (it == cur->end())
            return nullptr;
        cur = &*it;
    }
    return cur;
}

std::string string_at(const json& j, std::initializer_list<const char*> keys) {
    const json* v = path(j, keys);
    return v && v->is_string() ? v->get<std::string>() : std::string{};
}

std::optional<double> number_at(const json& j, std::initializer_list<const char*> keys) {
    const json* v = path(j, keys);
    if (v && v->is_number())
        return v->get<double>();
    return std::nullopt;
}

const json& array_or_empty(const json* v) {
    static const json empty = json::array();
    return v && v->is_array() ? *v : empty;
}

std::string english_description(const json& descriptions, const char* value_key) {
    std::string first;
    for (const auto& d : array_or_empty(&descriptions)) {
        std::string value = string_at(d, {value_key});
        if (string_at(d, {"lang"}) == "en")
            return value;
        if (first.empty())
            first = value;
    }
    return first;
}

RawCveEntry parse_legacy_item(const json& item) {
    RawCveEntry e;
    e.cve = string_at(item, {"cve", "CVE_data_meta", "ID"});
    if (const json* d = path(item, {"cve", "description", "description_data"}))
        e.description = english_description(*d, "value");
    for (const auto& ref : array_or_empty(path(item, {"cve", "references", "reference_data"})))
        if (auto url = string_at(ref, {"url"}); !url.empty())
            e.reference_urls.push_back(url);
    for (const auto& pt : array_or_empty(path(item, {"cve", "problemtype", "problemtype_data"})))
        for (const auto& d : array_or_empty(path(pt, {"description"})))
            if (auto v = string_at(d, {"value"}); !v.empty())
                e.cwe_texts.push_back(v);
    if (const json* v3 = path(item, {"impact", "baseMetricV3", "cvssV3"})) {
        std::string version = string_at(*v3, {"version"});
        e.cvss_entries.push_back({version.empty() ? "3.1" : version, string_at(*v3, {"baseSeverity"}),
                                  number_at(*v3, {"baseScore"})});
    }
    if (const json* v2 = path(item, {"impact", "baseMetricV2"})) {
        std::string version = string_at(*v2, {"cvssV2", "version"});
        e.cvss_entries.push_back({version.empty() ? "2.0" : version, string_at(*v2, {"severity"}),
                                  number_at(*v2, {"cvssV2", "baseScore"})});
    }
    return e;
}

RawCveEntry parse_api_item(const json& item) {
    const json* cve = path(item, {"cve"});
    if (!cve)
        cve = &item;
    RawCveEntry e;
    e.cve = string_at(*cve, {"id"});
    if (const json* d = path(*cve, {"descriptions"}))
        e.description = english_description(*d, "value");
    for (const auto& ref : array_or_empty(path(*cve, {"references"})))
        if (auto url = string_at(ref, {"url"}); !url.empty())
            e.reference_urls.push_back(url);
    for (const auto& w : array_or_empty(path(*cve, {"weaknesses"})))
        for (const auto& d : array_or_empty(path(w, {"description"})))
            if (auto v = string_at(d, {"value"}); !v.empty())
                e.cwe_texts.push_back(v);
    if (const json* metrics = path(*cve, {"metrics"}); metrics && metrics->is_object()) {
        for (const char* key : {"cvssMetricV31", "cvssMetricV30", "cvssMetricV2"}) {
            for (const auto& m : array_or_empty(path(*metrics, {key}))) {
                std::string version = string_at(m, {"cvssData", "version"});
                std::string label = string_at(m, {"cvssData", "baseSeverity"});
                if (label.empty())
                    label = string_at(m, {"baseSeverity"});
                e.cvss_entries.push_back({version.empty() ? key : version, label,
                                          number_at(m, {"cvssData", "baseScore"})});
            }
        }
    }
    return e;
}

}  // namespace

std::vector<RawCveEntry> parse_nvd_feed(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw FeedSyntaxError(std::string("NVD feed is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw FeedSyntaxError("NVD feed must be a JSON object");

    std::vector<RawCveEntry> out;
    if (auto it = doc.find("CVE_Items"); it != doc.end()) {
        if (!it->is_array())
            throw FeedSyntaxError("CVE_Items must be an array");
        for (const auto& item : *it)
            out.push_back(parse_legacy_item(item));
    } else if (auto vit = doc.find("vulnerabilities"); vit != doc.end()) {
        if (!vit->is_array())
            throw FeedSyntaxError("vulnerabilities must be an array");
        for (const auto& item : *vit)
            out.push_back(parse_api_item(item));
    } else {
        throw FeedSyntaxError("document has neither CVE_Items nor vulnerabilities");
    }
    for (const auto& e : out)
        if (e.cve.empty())
            throw FeedSyntaxError("feed item without a CVE id");
    return out;
}

Cve2CweStore parse_cve2cwe(const json& document) {
    if (!document.is_object())
        throw FeedSyntaxError("CVE2CWE dataset must be an object keyed by CVE id");
    Cve2CweStore store;
    for (const auto& [cve, value] : document.items()) {
        Cve2CweEntry entry;
        entry.cve = cve;
        try {
            for (const auto& c : array_or_empty(path(value, {"cwes"})))
                entry.cwes.push_back(c.is_string() ? c.get<std::string>() : c.dump());
            for (const auto& s : array_or_empty(path(value, {"severities"}))) {
                CvssEntry sev;
                sev.version = string_at(s, {"version"});
                sev.label = string_at(s, {"label"});
                if (const json* score = path(s, {"score"}); score && !score->is_null()) {
                    if (score->is_number())
                        sev.score = score->get<double>();
                    else if (score->is_string())
                        sev.score = std::stod(score->get<std::string>());
                }
                entry.severities.push_back(std::move(sev));
            }
        } catch (const std::exception& e) {
            throw FeedSyntaxError("CVE2CWE entry " + cve + ": " + e.what());
        }
        store.emplace(cve, std::move(entry));
    }
    return store;
}

json cve2cwe_to_json(const Cve2CweStore& store) {
    json doc = json::object();
    for (const auto& [cve, entry] : store) {
        json sev = json::array();
        for (const auto& s : entry.severities)
            sev.push_back({{"version", s.version},
                           {"label", s.label},
                           {"score", s.score ? json(*s.score) : json(nullptr)}});
        doc[cve] = {{"cwes", entry.cwes}, {"severities", sev}};
    }
    return doc;
}

Cve2CweStore cve2cwe_from_feed(const std::vector<RawCveEntry>& entries) {
    Cve2CweStore store;
    for (const auto& e : entries)
        store[e.cve] = {e.cve, e.cwe_texts, e.cvss_entries};
    return store;
}

}  // namespace triage::ingest
