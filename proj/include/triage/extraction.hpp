#pragma once

// Language detection and grammar-based extraction of the methods that
// enclose buggy lines.

#include "triage/json_io.hpp"
#include "triage/model.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

extern "C" {
typedef struct TSLanguage TSLanguage;
}

namespace triage::extract {

enum class LanguageId { C, Cpp, Go, Java, JavaScript, TypeScript, Ruby, Python, Php };

inline constexpr std::array<LanguageId, 9> kAllLanguages = {
    LanguageId::C,    LanguageId::Cpp,    LanguageId::Go,     LanguageId::Java, LanguageId::JavaScript,
    LanguageId::TypeScript, LanguageId::Ruby, LanguageId::Python, LanguageId::Php};

std::string_view to_string(LanguageId language);  // "c", "cpp", "go", ...
std::optional<LanguageId> parse_language(std::string_view name);

/// Extension (with dot, lower case) to language.
using ExtensionTable = std::map<std::string, LanguageId>;
/// Syntax node types that count as a method/function definition per language.
using NodeClassTable = std::map<LanguageId, std::set<std::string>>;

const ExtensionTable& default_extensions();
const NodeClassTable& default_node_classes();

struct ExtractionConfig {
    ExtensionTable extensions = default_extensions();
    NodeClassTable node_classes = default_node_classes();

    /// Applies `{"extensions": {".mjs": "javascript"}, "node_classes": {"python": [...]}}`;
    /// listed keys replace the defaults.
    void apply_overrides(const json& doc);
};

/// nullopt means Unsupported.
std::optional<LanguageId> detect_language(std::string_view filename,
                                          const ExtensionTable& table = default_extensions());

/// Documentation, data and asset files that are never treated as code.
bool is_non_code_file(std::string_view filename);

/// Grammar for a file. TypeScript files ending in .tsx use the TSX grammar.
const TSLanguage* grammar_for(LanguageId language, std::string_view filename);

/// 1-based inclusive line span of a syntax node. A node whose end point sits
/// at column 0 of a later row ends on the previous row.
struct LineSpan {
    int start_line = 0;
    int end_line = 0;
};

struct MethodExtraction {
    std::vector<MethodSnippet> methods;  // deduplicated, ordered by start line
    std::vector<int> unmatched_lines;    // buggy lines outside any definition
};

/// For every buggy line, the innermost definition node (smallest line span,
/// then smallest byte length) containing it. Throws ParseFailure when the
/// grammar cannot produce a tree for the content.
MethodExtraction extract_methods_detailed(const BuggyFile& file, LanguageId language,
                                          const NodeClassTable& node_classes = default_node_classes());

std::vector<MethodSnippet> extract_methods(const BuggyFile& file, LanguageId language,
                                           const NodeClassTable& node_classes = default_node_classes());

struct RecordExtractionReport {
    std::vector<std::string> parse_failures;                // filenames
    std::map<std::string, std::vector<int>> unmatched;      // filename -> lines
};

/// Fills record.methods from every supported file with buggy lines. A parse
/// failure on one file is reported and does not stop the others.
RecordExtractionReport extract_record_methods(EnrichedRecord& record, const ExtractionConfig& config = {});

}  // namespace triage::extract
