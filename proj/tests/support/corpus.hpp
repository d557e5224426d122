#pragma once

// Access to the before/after fixture corpus under tests/data/corpus.

#include "triage/json_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace corpus {

struct Case {
    std::string language;  // directory name
    std::string name;
    std::string filename;  // basename of the source file
    std::string before;
    std::string after;
    std::string diff;
};

inline std::filesystem::path root() { return std::filesystem::path(TEST_DATA_DIR) / "corpus"; }

inline std::vector<Case> load_all() {
    std::vector<Case> out;
    std::vector<std::filesystem::path> dirs;
    for (const auto& lang : std::filesystem::directory_iterator(root()))
        for (const auto& c : std::filesystem::directory_iterator(lang.path()))
            dirs.push_back(c.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        Case c;
        c.language = dir.parent_path().filename().string();
        c.name = dir.filename().string();
        for (const auto& f : std::filesystem::directory_iterator(dir / "before"))
            c.filename = f.path().filename().string();
        c.before = triage::read_text_file(dir / "before" / c.filename);
        c.after = triage::read_text_file(dir / "after" / c.filename);
        c.diff = triage::read_text_file(dir / "patch.diff");
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace corpus
