#include "triage/diff.hpp"

#include "triage/error.hpp"
#include "triage/text.hpp"

#include <charconv>
#include <regex>

namespace triage::ingest {

namespace {

struct HunkHeader {
    int old_start = 0;
    int old_count = 1;
    int new_start = 0;
    int new_count = 1;
};

HunkHeader parse_hunk_header(std::string_view line) {
    static const std::regex re(R"(^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@.*$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(line.begin(), line.end(), m, re))
        throw DiffSyntaxError("malformed hunk header: " + std::string(line));
    auto num = [&](int idx, int fallback) {
        if (!m[idx].matched)
            return fallback;
        return std::stoi(m[idx].str());
    };
    return {num(1, 0), num(2, 1), num(3, 0), num(4, 1)};
}

std::string header_path(std::string_view rest, bool strip_prefix, char prefix) {
    // Timestamps of plain `diff -u` follow a tab.
    if (auto tab = rest.find('\t'); tab != std::string_view::npos)
        rest = rest.substr(0, tab);
    rest = text::trim(rest);
    if (rest == "/dev/null")
        return {};
    if (rest.size() > 1 && rest.front() == '"' && rest.back() == '"')
        rest = rest.substr(1, rest.size() - 2);
    if (strip_prefix && rest.size() > 2 && rest[0] == prefix && rest[1] == '/')
        rest.remove_prefix(2);
    return std::string(rest);
}

class DiffParser {
public:
    explicit DiffParser(std::string_view diff) : lines_(text::split_lines(diff)) {}

    std::vector<FileDiff> run() {
        while (i_ < lines_.size()) {
            std::string_view line = lines_[i_];
            if (line.starts_with("diff --git ")) {
                start_git_file(line);
            } else if (line.starts_with("--- ") && i_ + 1 < lines_.size() && lines_[i_ + 1].starts_with("+++ ")) {
                file_headers(line, lines_[i_ + 1]);
                i_ += 2;
                continue;
            } else if (line.starts_with("@@ ")) {
                hunk(line);
                continue;
            } else if (current() && !current()->binary) {
                extended_header(line);
            }
            ++i_;
        }
        return std::move(files_);
    }

private:
    FileDiff* current() { return files_.empty() ? nullptr : &files_.back(); }

    void start_git_file(std::string_view line) {
        git_mode_ = true;
        saw_file_headers_ = false;
        FileDiff f;
        std::string_view rest = line.substr(11);
        if (auto pos = rest.find(" b/"); rest.starts_with("a/") && pos != std::string_view::npos) {
            f.old_path = std::string(rest.substr(2, pos - 2));
            f.new_path = std::string(rest.substr(pos + 3));
        }
        files_.push_back(std::move(f));
    }

    void extended_header(std::string_view line) {
        FileDiff& f = *current();
        if (!f.hunks.empty())
            return;
        if (line.starts_with("new file mode"))
            f.old_path.clear();
        else if (line.starts_with("deleted file mode"))
            f.new_path.clear();
        else if (line.starts_with("rename from "))
            f.old_path = std::string(line.substr(12));
        else if (line.starts_with("rename to "))
            f.new_path = std::string(line.substr(10));
        else if (line.starts_with("Binary files ") || line.starts_with("GIT binary patch"))
            f.binary = true;
    }

    void file_headers(std::string_view minus, std::string_view plus) {
        if (!git_mode_ || saw_file_headers_ || !current()) {
            // Plain multi-file `diff -u` output: every ---/+++ pair opens a file.
            files_.emplace_back();
        }
        saw_file_headers_ = true;
        FileDiff& f = *current();
        // Outside git mode the a/ b/ prefixes are stripped only when both sides use them.
        const bool prefixed = git_mode_ || ((minus.substr(4).starts_with("a/") || minus.substr(4).starts_with("/dev/null")) &&
                                            (plus.substr(4).starts_with("b/") || plus.substr(4).starts_with("/dev/null")));
        f.old_path = header_path(minus.substr(4), prefixed, 'a');
        f.new_path = header_path(plus.substr(4), prefixed, 'b');
        if (f.old_path.empty() && f.new_path.empty())
            throw DiffSyntaxError("file header with /dev/null on both sides");
    }

    void hunk(std::string_view header_line) {
        FileDiff* f = current();
        if (!f)
            throw DiffSyntaxError("hunk before any file header");
        HunkHeader h = parse_hunk_header(header_line);
        Hunk out;
        out.filename = f->path();
        out.header = std::string(header_line);

        int old_left = h.old_count;
        int new_left = h.new_count;
        int old_line = h.old_start;
        int new_line = h.new_start;
        ++i_;
        while (old_left > 0 || new_left > 0) {
            if (i_ >= lines_.size())
                throw DiffSyntaxError("hunk '" + out.header + "' ends before its line counts are satisfied");
            std::string_view line = lines_[i_];
            char tag = line.empty() ? ' ' : line.front();
            std::string body = line.empty() ? std::string{} : std::string(line.substr(1));
            switch (tag) {
            case ' ':
                if (old_left <= 0 || new_left <= 0)
                    throw DiffSyntaxError("hunk '" + out.header + "' has more context lines than its header allows");
                --old_left;
                --new_left;
                ++old_line;
                ++new_line;
                break;
            case '-':
                if (old_left <= 0)
                    throw DiffSyntaxError("hunk '" + out.header + "' deletes more lines than its header allows");
                out.deleted_lines.push_back({old_line++, std::move(body)});
                --old_left;
                break;
            case '+':
                if (new_left <= 0)
                    throw DiffSyntaxError("hunk '" + out.header + "' adds more lines than its header allows");
                out.added_lines.push_back({new_line++, std::move(body)});
                --new_left;
                break;
            case '\\':
                break;  // "\ No newline at end of file"
            default:
                throw DiffSyntaxError("hunk '" + out.header + "' is shorter than its header claims");
            }
            ++i_;
        }
        // A trailing "\ No newline" marker belongs to this hunk.
        if (i_ < lines_.size() && lines_[i_].starts_with("\\"))
            ++i_;
        // Extra body lines after the counts are exhausted mean the header lied.
        if (i_ < lines_.size()) {
            std::string_view next = lines_[i_];
            bool is_minus_header = next.starts_with("--- ") && i_ + 1 < lines_.size() &&
                                   lines_[i_ + 1].starts_with("+++ ");
            bool is_signature = next == "-- " || next == "--";  // git format-patch trailer
            if (is_signature)
                is_minus_header = true;
            if ((next.starts_with("-") && !is_minus_header) || (next.starts_with("+") && !next.starts_with("+++ ")))
                throw DiffSyntaxError("hunk '" + out.header + "' is longer than its header claims");
        }
        if (out.deleted_lines.empty() && out.added_lines.empty())
            throw DiffSyntaxError("hunk '" + out.header + "' has no changes");
        f->hunks.push_back(std::move(out));
    }

    std::vector<std::string_view> lines_;
    std::size_t i_ = 0;
    std::vector<FileDiff> files_;
    bool git_mode_ = false;
    bool saw_file_headers_ = false;
};

}  // namespace

std::vector<FileDiff> parse_diff_files(std::string_view diff_text) { return DiffParser(diff_text).run(); }

std::vector<Hunk> parse_unified_diff(std::string_view diff_text) {
    std::vector<Hunk> out;
    for (auto& f : parse_diff_files(diff_text))
        for (auto& h : f.hunks)
            out.push_back(std::move(h));
    return out;
}

}  // namespace triage::ingest
