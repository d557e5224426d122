#pragma once

#include "triage/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace triage::ingest {

/// One file section of a unified diff.
struct FileDiff {
    std::string old_path;  // empty for a created file
    std::string new_path;  // empty for a deleted file
    bool binary = false;
    std::vector<Hunk> hunks;

    /// Path of the pre-image, or the new path for created files.
    const std::string& path() const { return old_path.empty() ? new_path : old_path; }
    bool created() const { return old_path.empty(); }
};

/// Parses git-style or plain `diff -u` output. Line numbers of deleted lines
/// are pre-image numbers, those of added lines post-image numbers, both
/// derived from the @@ headers. Throws DiffSyntaxError when a header's line
/// counts disagree with its body.
std::vector<FileDiff> parse_diff_files(std::string_view diff_text);

/// All hunks of parse_diff_files, in diff order.
std::vector<Hunk> parse_unified_diff(std::string_view diff_text);

}  // namespace triage::ingest
