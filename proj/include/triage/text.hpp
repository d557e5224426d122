#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace triage::text {

/// Splits content into lines without their terminators. A trailing newline
/// does not start an extra empty line; "\r\n" endings keep the '\r'.
std::vector<std::string_view> split_lines(std::string_view content);

/// Number of lines split_lines would return.
std::size_t line_count(std::string_view content);

/// Lines [first, last] (1-based, inclusive) sliced verbatim from content,
/// including the terminator of every line but the last one.
std::string slice_lines(std::string_view content, int first, int last);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Accepts "YYYY-MM-DD" optionally followed by a time part ("T..." or " ...").
/// The calendar date is taken as written; no timezone conversion happens.
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);
std::string format_date(std::chrono::year_month_day date);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Replaces each `{{name}}` with the value from the lookup; unknown names throw TemplateError.
template <typename Lookup>
std::string render_placeholders(std::string_view tmpl, Lookup&& lookup);

}  // namespace triage::text

#include "triage/error.hpp"

namespace triage::text {

template <typename Lookup>
std::string render_placeholders(std::string_view tmpl, Lookup&& lookup) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos)
            throw TemplateError("unterminated placeholder in template");
        out.append(tmpl.substr(pos, open - pos));
        std::string_view name = tmpl.substr(open + 2, close - open - 2);
        std::optional<std::string> value = lookup(name);
        if (!value)
            throw TemplateError("unknown template placeholder {{" + std::string(name) + "}}");
        out.append(*value);
        pos = close + 2;
    }
    return out;
}

}  // namespace triage::text
