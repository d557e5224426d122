#include "triage/json_io.hpp"

#include "triage/error.hpp"

#include <fstream>
#include <sstream>

namespace triage {

namespace {

template <typename T>
T field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name))
        throw MalformedRecord(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw MalformedRecord(std::string("bad field '") + name + "': " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const char* name, T fallback) {
    if (!j.is_object() || !j.contains(name) || j.at(name).is_null())
        return fallback;
    return field<T>(j, name);
}

}  // namespace

json cwes_to_json(const CweSet& set) {
    json arr = json::array();
    for (const auto& id : set)
        arr.push_back(id.str());
    return arr;
}

CweSet cwes_from_json(const json& j) {
    if (!j.is_array())
        throw MalformedCweId("CWE list must be an array");
    CweSet out;
    for (const auto& item : j)
        out.insert(item.get<CweId>());
    return out;
}

json score_to_json(SeverityScore score) {
    if (score.is_declined())
        return -1;
    return score.value();
}

SeverityScore score_from_json(const json& j) {
    if (j.is_number())
        return validate_score(j.get<double>());
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw FormatViolation("non-numeric severity score: '" + s + "'");
        }
        if (used != s.size())
            throw FormatViolation("non-numeric severity score: '" + s + "'");
        return validate_score(v);
    }
    throw FormatViolation("severity score must be a number");
}

void to_json(json& j, const NumberedLine& line) {
    j = json{{"line_number", line.line_number}, {"line", line.text}};
}

void from_json(const json& j, NumberedLine& line) {
    line.line_number = field<int>(j, "line_number");
    line.text = field<std::string>(j, "line");
}

void to_json(json& j, const BuggyFile& file) {
    j = json{{"filename", file.filename}, {"content", file.content}, {"buggy_lines", file.buggy_lines}};
}

void from_json(const json& j, BuggyFile& file) {
    file.filename = field<std::string>(j, "filename");
    file.content = field<std::string>(j, "content");
    file.buggy_lines = field_or<std::vector<NumberedLine>>(j, "buggy_lines", {});
}

void to_json(json& j, const Hunk& hunk) {
    j = json{{"filename", hunk.filename},
             {"header", hunk.header},
             {"deleted_lines", hunk.deleted_lines},
             {"added_lines", hunk.added_lines}};
}

void from_json(const json& j, Hunk& hunk) {
    hunk.filename = field<std::string>(j, "filename");
    hunk.header = field<std::string>(j, "header");
    hunk.deleted_lines = field_or<std::vector<NumberedLine>>(j, "deleted_lines", {});
    hunk.added_lines = field_or<std::vector<NumberedLine>>(j, "added_lines", {});
}

void to_json(json& j, const MethodSnippet& method) {
    j = json{{"filename", method.filename},     {"language", method.language},
             {"method_name", method.method_name}, {"start_line", method.start_line},
             {"end_line", method.end_line},       {"body", method.body}};
}

void from_json(const json& j, MethodSnippet& method) {
    method.filename = field<std::string>(j, "filename");
    method.language = field<std::string>(j, "language");
    method.method_name = field_or<std::string>(j, "method_name", "");
    method.start_line = field<int>(j, "start_line");
    method.end_line = field<int>(j, "end_line");
    method.body = field<std::string>(j, "body");
}

void to_json(json& j, const EnrichedRecord& record) {
    j = json{{"cve", record.cve},
             {"description", record.description},
             {"url", record.url},
             {"date", record.commit_date},
             {"github_description", record.github_description ? json(*record.github_description) : json(nullptr)},
             {"buggy_code", record.files},
             {"hunks", record.hunks},
             {"methods", record.methods}};
}

void from_json(const json& j, EnrichedRecord& record) {
    record.cve = field<std::string>(j, "cve");
    record.description = field_or<std::string>(j, "description", "");
    record.url = field_or<std::string>(j, "url", "");
    record.commit_date = field_or<std::string>(j, "date", "");
    if (j.contains("github_description") && j.at("github_description").is_string())
        record.github_description = j.at("github_description").get<std::string>();
    else
        record.github_description.reset();
    record.files = field_or<std::vector<BuggyFile>>(j, "buggy_code", {});
    record.hunks = field_or<std::vector<Hunk>>(j, "hunks", {});
    record.methods = field_or<std::vector<MethodSnippet>>(j, "methods", {});
}

void to_json(json& j, const GroundTruth& gt) {
    j = json{{"cwes", cwes_to_json(gt.cwes)},
             {"label", to_string(gt.label)},
             {"score", score_to_json(gt.score)},
             {"version", to_string(gt.version)}};
}

void from_json(const json& j, GroundTruth& gt) {
    gt.cwes = cwes_from_json(j.at("cwes"));
    auto label = parse_label(field<std::string>(j, "label"));
    if (!label)
        throw MalformedRecord("ground truth label is not one of LOW/MEDIUM/HIGH/CRITICAL");
    gt.label = *label;
    gt.score = score_from_json(j.at("score"));
    gt.version = parse_cvss_version(field<std::string>(j, "version"));
    validate(gt);
}

EnrichedRecord record_from_json(const json& j) {
    try {
        return j.get<EnrichedRecord>();
    } catch (const json::exception& e) {
        throw MalformedRecord(std::string("malformed record: ") + e.what());
    }
}

GroundTruth ground_truth_from_json(const json& j) {
    try {
        return j.get<GroundTruth>();
    } catch (const json::exception& e) {
        throw MalformedRecord(std::string("malformed ground truth: ") + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + ": invalid JSON: " + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
        throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw IoError("short write to " + path.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace triage

namespace nlohmann {

triage::CweId adl_serializer<triage::CweId>::from_json(const json& j) {
    if (j.is_number_integer()) {
        auto v = j.get<long long>();
        if (v < 1 || v > static_cast<long long>(UINT32_MAX))
            throw triage::MalformedCweId("CWE ids start at 1");
        return triage::CweId(static_cast<std::uint32_t>(v));
    }
    if (!j.is_string())
        throw triage::MalformedCweId("CWE id must be a string");
    return triage::CweId::parse(j.get<std::string>());
}

void adl_serializer<triage::CweId>::to_json(json& j, const triage::CweId& id) { j = id.str(); }

}  // namespace nlohmann
