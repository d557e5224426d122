#pragma once

// Canonical JSON shapes of the domain types. Field names for records follow
// the dataset schema: buggy_code, description, url, cve, date, github_description.

#include "json.hpp"
#include "triage/model.hpp"

#include <filesystem>

namespace triage {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json cwes_to_json(const CweSet& set);
CweSet cwes_from_json(const json& j);

json score_to_json(SeverityScore score);
SeverityScore score_from_json(const json& j);  // number or numeric string

void to_json(json& j, const NumberedLine& line);
void from_json(const json& j, NumberedLine& line);
void to_json(json& j, const BuggyFile& file);
void from_json(const json& j, BuggyFile& file);
void to_json(json& j, const Hunk& hunk);
void from_json(const json& j, Hunk& hunk);
void to_json(json& j, const MethodSnippet& method);
void from_json(const json& j, MethodSnippet& method);
void to_json(json& j, const EnrichedRecord& record);
void from_json(const json& j, EnrichedRecord& record);
void to_json(json& j, const GroundTruth& gt);
void from_json(const json& j, GroundTruth& gt);

EnrichedRecord record_from_json(const json& j);
GroundTruth ground_truth_from_json(const json& j);

// --- file helpers ----------------------------------------------------------

json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically (temp file + rename). Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content);
/// Stable rendering used for everything persisted: 2-space indent, trailing newline.
std::string dump_json(const json& j);

}  // namespace triage

namespace nlohmann {
template <>
struct adl_serializer<triage::CweId> {
    static triage::CweId from_json(const json& j);
    static void to_json(json& j, const triage::CweId& id);
};
}  // namespace nlohmann
