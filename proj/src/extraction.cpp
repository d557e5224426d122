#include "triage/extraction.hpp"

#include "triage/error.hpp"
#include "triage/text.hpp"

#include <tree_sitter/api.h>

#include <algorithm>
#include <memory>

extern "C" {
const TSLanguage* tree_sitter_c(void);
const TSLanguage* tree_sitter_cpp(void);
const TSLanguage* tree_sitter_go(void);
const TSLanguage* tree_sitter_java(void);
const TSLanguage* tree_sitter_javascript(void);
const TSLanguage* tree_sitter_typescript(void);
const TSLanguage* tree_sitter_tsx(void);
const TSLanguage* tree_sitter_ruby(void);
const TSLanguage* tree_sitter_python(void);
const TSLanguage* tree_sitter_php(void);
}

namespace triage::extract {

std::string_view to_string(LanguageId language) {
    switch (language) {
    case LanguageId::C: return "c";
    case LanguageId::Cpp: return "cpp";
    case LanguageId::Go: return "go";
    case LanguageId::Java: return "java";
    case LanguageId::JavaScript: return "javascript";
    case LanguageId::TypeScript: return "typescript";
    case LanguageId::Ruby: return "ruby";
    case LanguageId::Python: return "python";
    case LanguageId::Php: return "php";
    }
    return "?";
}

std::optional<LanguageId> parse_language(std::string_view name) {
    auto lower = text::to_lower(text::trim(name));
    for (auto l : kAllLanguages)
        if (to_string(l) == lower)
            return l;
    if (lower == "c++")
        return LanguageId::Cpp;
    return std::nullopt;
}

const ExtensionTable& default_extensions() {
    static const ExtensionTable table = {
        {".c", LanguageId::C},           {".h", LanguageId::C},
        {".cc", LanguageId::Cpp},        {".cpp", LanguageId::Cpp},         {".hpp", LanguageId::Cpp},
        {".go", LanguageId::Go},         {".java", LanguageId::Java},
        {".js", LanguageId::JavaScript}, {".jsx", LanguageId::JavaScript},
        {".ts", LanguageId::TypeScript}, {".tsx", LanguageId::TypeScript},
        {".rb", LanguageId::Ruby},       {".py", LanguageId::Python},       {".php", LanguageId::Php},
    };
    return table;
}

const NodeClassTable& default_node_classes() {
    static const std::set<std::string> js_like = {
        "function_declaration", "function_expression", "generator_function",
        "generator_function_declaration", "arrow_function", "method_definition",
    };
    static const NodeClassTable table = {
        {LanguageId::C, {"function_definition"}},
        {LanguageId::Cpp, {"function_definition", "lambda_expression"}},
        {LanguageId::Go, {"function_declaration", "method_declaration", "func_literal"}},
        {LanguageId::Java,
         {"method_declaration", "constructor_declaration", "compact_constructor_declaration", "lambda_expression"}},
        {LanguageId::JavaScript, js_like},
        {LanguageId::TypeScript, js_like},
        {LanguageId::Ruby, {"method", "singleton_method", "lambda"}},
        {LanguageId::Python, {"function_definition", "lambda"}},
        {LanguageId::Php, {"function_definition", "method_declaration", "anonymous_function", "arrow_function"}},
    };
    return table;
}

void ExtractionConfig::apply_overrides(const json& doc) {
    if (doc.contains("extensions")) {
        for (const auto& [ext, lang] : doc.at("extensions").items()) {
            auto id = parse_language(lang.get<std::string>());
            if (!id)
                throw ConfigError("extensions." + ext + ": unsupported language " + lang.dump());
            std::string key = text::to_lower(ext);
            if (!key.starts_with("."))
                key.insert(0, ".");
            extensions[key] = *id;
        }
    }
    if (doc.contains("node_classes")) {
        for (const auto& [lang, classes] : doc.at("node_classes").items()) {
            auto id = parse_language(lang);
            if (!id)
                throw ConfigError("node_classes: unsupported language " + lang);
            node_classes[*id] = classes.get<std::set<std::string>>();
        }
    }
}

namespace {

std::string extension_of(std::string_view filename) {
    auto slash = filename.find_last_of('/');
    std::string_view base = slash == std::string_view::npos ? filename : filename.substr(slash + 1);
    auto dot = base.find_last_of('.');
    if (dot == std::string_view::npos || dot == 0)
        return {};
    return text::to_lower(base.substr(dot));
}

}  // namespace

std::optional<LanguageId> detect_language(std::string_view filename, const ExtensionTable& table) {
    auto it = table.find(extension_of(filename));
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

bool is_non_code_file(std::string_view filename) {
    static const std::set<std::string> non_code = {
        ".md",  ".markdown", ".rst",  ".txt",  ".adoc", ".json", ".yml",  ".yaml", ".toml", ".ini",
        ".cfg", ".conf",     ".xml",  ".csv",  ".lock", ".sum",  ".mod",  ".svg",  ".png",  ".jpg",
        ".jpeg", ".gif",     ".ico",  ".pdf",  ".map",  ".snap", ".po",   ".pot",  ".properties",
    };
    auto ext = extension_of(filename);
    return ext.empty() || non_code.contains(ext);
}

const TSLanguage* grammar_for(LanguageId language, std::string_view filename) {
    switch (language) {
    case LanguageId::C: return tree_sitter_c();
    case LanguageId::Cpp: return tree_sitter_cpp();
    case LanguageId::Go: return tree_sitter_go();
    case LanguageId::Java: return tree_sitter_java();
    case LanguageId::JavaScript: return tree_sitter_javascript();
    case LanguageId::TypeScript:
        return extension_of(filename) == ".tsx" ? tree_sitter_tsx() : tree_sitter_typescript();
    case LanguageId::Ruby: return tree_sitter_ruby();
    case LanguageId::Python: return tree_sitter_python();
    case LanguageId::Php: return tree_sitter_php();
    }
    return nullptr;
}

namespace {

struct ParserDeleter {
    void operator()(TSParser* p) const { ts_parser_delete(p); }
};
struct TreeDeleter {
    void operator()(TSTree* t) const { ts_tree_delete(t); }
};

LineSpan span_of(TSNode node) {
    TSPoint start = ts_node_start_point(node);
    TSPoint end = ts_node_end_point(node);
    int end_row = static_cast<int>(end.row);
    if (end.column == 0 && end.row > start.row)
        --end_row;
    return {static_cast<int>(start.row) + 1, end_row + 1};
}

std::string node_text(std::string_view content, TSNode node) {
    auto begin = ts_node_start_byte(node);
    auto end = ts_node_end_byte(node);
    return std::string(content.substr(begin, end - begin));
}

/// Name of a definition: its `name` field, or for C-family declarators the
/// identifier at the end of the `declarator` chain. Empty when anonymous.
std::string definition_name(std::string_view content, TSNode node) {
    TSNode name = ts_node_child_by_field_name(node, "name", 4);
    if (!ts_node_is_null(name))
        return node_text(content, name);
    TSNode decl = ts_node_child_by_field_name(node, "declarator", 10);
    while (!ts_node_is_null(decl)) {
        TSNode inner = ts_node_child_by_field_name(decl, "declarator", 10);
        if (ts_node_is_null(inner))
            return node_text(content, decl);
        decl = inner;
    }
    return {};
}

struct Candidate {
    TSNode node;
    LineSpan span;
    std::uint32_t bytes;
};

bool better(const Candidate& a, const Candidate& b) {
    int wa = a.span.end_line - a.span.start_line;
    int wb = b.span.end_line - b.span.start_line;
    if (wa != wb)
        return wa < wb;
    if (a.bytes != b.bytes)
        return a.bytes < b.bytes;
    return ts_node_start_byte(a.node) < ts_node_start_byte(b.node);
}

/// Depth-first search restricted to subtrees whose span contains `line`.
void innermost(TSNode node, int line, const std::set<std::string>& classes, std::optional<Candidate>& best) {
    LineSpan span = span_of(node);
    if (line < span.start_line || line > span.end_line)
        return;
    if (classes.contains(ts_node_type(node))) {
        Candidate c{node, span, ts_node_end_byte(node) - ts_node_start_byte(node)};
        if (!best || better(c, *best))
            best = c;
    }
    const uint32_t n = ts_node_child_count(node);
    for (uint32_t i = 0; i < n; ++i) {
        TSNode child = ts_node_child(node, i);
        if (static_cast<int>(ts_node_start_point(child).row) + 1 > line)
            break;
        innermost(child, line, classes, best);
    }
}

}  // namespace

MethodExtraction extract_methods_detailed(const BuggyFile& file, LanguageId language,
                                          const NodeClassTable& node_classes) {
    MethodExtraction out;
    if (file.buggy_lines.empty())
        return out;

    std::unique_ptr<TSParser, ParserDeleter> parser(ts_parser_new());
    if (!ts_parser_set_language(parser.get(), grammar_for(language, file.filename)))
        throw ParseFailure("grammar version mismatch for " + std::string(to_string(language)));
    std::unique_ptr<TSTree, TreeDeleter> tree(ts_parser_parse_string(
        parser.get(), nullptr, file.content.data(), static_cast<uint32_t>(file.content.size())));
    if (!tree)
        throw ParseFailure(file.filename + ": parser produced no tree");
    TSNode root = ts_tree_root_node(tree.get());
    if (std::string_view(ts_node_type(root)) == "ERROR")
        throw ParseFailure(file.filename + ": content could not be parsed as " + std::string(to_string(language)));

    static const std::set<std::string> none;
    auto cls = node_classes.find(language);
    const auto& classes = cls == node_classes.end() ? none : cls->second;

    std::map<std::pair<int, int>, MethodSnippet> by_span;
    for (const auto& buggy : file.buggy_lines) {
        std::optional<Candidate> best;
        innermost(root, buggy.line_number, classes, best);
        if (!best) {
            out.unmatched_lines.push_back(buggy.line_number);
            continue;
        }
        auto key = std::make_pair(best->span.start_line, best->span.end_line);
        if (by_span.contains(key))
            continue;
        MethodSnippet m;
        m.filename = file.filename;
        m.language = std::string(to_string(language));
        m.method_name = definition_name(file.content, best->node);
        m.start_line = best->span.start_line;
        m.end_line = best->span.end_line;
        m.body = text::slice_lines(file.content, m.start_line, m.end_line);
        by_span.emplace(key, std::move(m));
    }
    for (auto& [_, m] : by_span)
        out.methods.push_back(std::move(m));
    return out;
}

std::vector<MethodSnippet> extract_methods(const BuggyFile& file, LanguageId language,
                                           const NodeClassTable& node_classes) {
    return extract_methods_detailed(file, language, node_classes).methods;
}

RecordExtractionReport extract_record_methods(EnrichedRecord& record, const ExtractionConfig& config) {
    RecordExtractionReport report;
    record.methods.clear();
    for (const auto& file : record.files) {
        auto language = detect_language(file.filename, config.extensions);
        if (!language || file.buggy_lines.empty())
            continue;
        try {
            auto result = extract_methods_detailed(file, *language, config.node_classes);
            for (auto& m : result.methods)
                record.methods.push_back(std::move(m));
            if (!result.unmatched_lines.empty())
                report.unmatched[file.filename] = std::move(result.unmatched_lines);
        } catch (const ParseFailure&) {
            report.parse_failures.push_back(file.filename);
        }
    }
    return report;
}

}  // namespace triage::extract
