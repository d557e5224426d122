#include "triage/dataset.hpp"

#include "triage/diff.hpp"
#include "triage/json_io.hpp"
#include "triage/text.hpp"

#include <algorithm>

namespace triage::ingest {

std::optional<std::string> first_commit_url(const RawCveEntry& entry) {
    for (const auto& url : entry.reference_urls)
        if (is_commit_url(url))
            return url;
    return std::nullopt;
}

EnrichedRecord assemble_record(const RawCveEntry& entry, const CommitData& commit) {
    EnrichedRecord record;
    record.cve = entry.cve;
    record.description = entry.description;
    record.url = commit.url;
    record.commit_date = commit.date;
    record.github_description = commit.issue_message;

    for (auto& file : parse_diff_files(commit.diff_text)) {
        if (file.binary)
            continue;
        BuggyFile buggy;
        buggy.filename = file.path();
        auto content = commit.file_contents.find(buggy.filename);
        if (content != commit.file_contents.end())
            buggy.content = content->second;

        const auto lines = static_cast<int>(text::line_count(buggy.content));
        for (const auto& hunk : file.hunks)
            for (const auto& del : hunk.deleted_lines)
                if (del.line_number <= lines)
                    buggy.buggy_lines.push_back(del);
        std::sort(buggy.buggy_lines.begin(), buggy.buggy_lines.end(),
                  [](const NumberedLine& a, const NumberedLine& b) { return a.line_number < b.line_number; });
        buggy.buggy_lines.erase(std::unique(buggy.buggy_lines.begin(), buggy.buggy_lines.end(),
                                            [](const NumberedLine& a, const NumberedLine& b) {
                                                return a.line_number == b.line_number;
                                            }),
                                buggy.buggy_lines.end());

        record.files.push_back(std::move(buggy));
        for (auto& h : file.hunks)
            record.hunks.push_back(std::move(h));
    }
    return record;
}

std::string_view to_string(SplitSide side) { return side == SplitSide::Evaluation ? "evaluation" : "finetune"; }

std::filesystem::path DatasetStore::record_path(const std::string& hash) const {
    return root_ / "records" / hash.substr(0, 2) / (hash + ".json");
}

std::string DatasetStore::put(const EnrichedRecord& record) const {
    std::string doc = dump_json(json(record));
    std::string hash = text::sha256_hex(doc);
    auto path = record_path(hash);
    if (!std::filesystem::exists(path))
        write_text_file(path, doc);
    return hash;
}

EnrichedRecord DatasetStore::get(const std::string& hash) const {
    std::string doc = read_text_file(record_path(hash));
    if (text::sha256_hex(doc) != hash)
        throw IoError("record " + hash + " does not match its content hash");
    return record_from_json(json::parse(doc));
}

void DatasetStore::write_manifest(const DatasetManifest& manifest) const {
    json records = json::array();
    auto sorted = manifest.records;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.cve < b.cve; });
    for (const auto& e : sorted) {
        json variants = json::array();
        for (auto v : e.variants)
            variants.push_back(to_string(v));
        records.push_back({{"cve", e.cve},
                           {"hash", e.hash},
                           {"path", record_path(e.hash).lexically_relative(root_).generic_string()},
                           {"split", to_string(e.split)},
                           {"ground_truth", e.ground_truth},
                           {"variants", variants}});
    }
    json doc{{"seed", manifest.seed}, {"eval_fraction", manifest.eval_fraction}, {"records", records}};
    write_text_file(manifest_path(), dump_json(doc));
}

DatasetManifest DatasetStore::read_manifest() const {
    json doc = read_json_file(manifest_path());
    DatasetManifest m;
    try {
        m.seed = doc.at("seed").get<std::uint64_t>();
        m.eval_fraction = doc.at("eval_fraction").get<double>();
        for (const auto& r : doc.at("records")) {
            ManifestEntry e;
            e.cve = r.at("cve").get<std::string>();
            e.hash = r.at("hash").get<std::string>();
            e.split = r.at("split").get<std::string>() == "finetune" ? SplitSide::Finetune : SplitSide::Evaluation;
            e.ground_truth = ground_truth_from_json(r.at("ground_truth"));
            for (const auto& v : r.at("variants")) {
                auto variant = parse_variant(v.get<std::string>());
                if (!variant)
                    throw IoError("manifest names unknown variant " + v.dump());
                e.variants.push_back(*variant);
            }
            m.records.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw IoError("malformed manifest " + manifest_path().string() + ": " + e.what());
    }
    return m;
}

}  // namespace triage::ingest
