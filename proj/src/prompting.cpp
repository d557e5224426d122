#include "triage/prompting.hpp"

#include "triage/dataset.hpp"
#include "triage/error.hpp"
#include "triage/text.hpp"

#include <cmath>

namespace triage::prompt {

namespace detail {
const std::map<std::string, std::string>& builtin_template_files();  // generated
}

namespace {

std::string strip_comments(std::string_view raw) {
    std::string out;
    for (const auto& line : text::split_lines(raw)) {
        if (line.starts_with("##"))
            continue;
        out += line;
        out += '\n';
    }
    // Templates are fragments; the trailing newline of the file is not part of them.
    while (!out.empty() && out.back() == '\n')
        out.pop_back();
    return out;
}

std::string_view fragment_for(Granularity g) {
    switch (g) {
        case Granularity::Files: return "input_files";
        case Granularity::Methods: return "input_methods";
        case Granularity::Hunks: return "input_hunks";
        case Granularity::None: break;
    }
    return {};
}

std::string tag_block(std::string_view tag, std::string_view filename, std::string_view payload) {
    std::string out;
    out += '<';
    out += tag;
    out += " filename=\"";
    out += filename;
    out += "\">\n";
    out += payload;
    if (!payload.empty() && payload.back() != '\n')
        out += '\n';
    out += "</";
    out += tag;
    out += '>';
    return out;
}

std::string render(const std::string& tmpl, const std::map<std::string, std::string>& values) {
    return text::render_placeholders(tmpl, [&](std::string_view name) -> std::optional<std::string> {
        auto it = values.find(std::string(name));
        if (it == values.end())
            return std::nullopt;
        return it->second;
    });
}

std::string range_text(const cvss::Band& band) {
    return band.lo.str() + "-" + band.hi.str();
}

}  // namespace

// --- templates ---------------------------------------------------------------

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (const auto& [name, raw] : detail::builtin_template_files())
            s.texts_[name] = strip_comments(raw);
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& dir) {
    TemplateSet s = builtin();
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("template directory not found: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt")
            continue;
        std::string name = entry.path().stem().string();
        if (!s.texts_.contains(name))
            throw ConfigError("unknown template '" + name + "' in " + dir.string());
        s.texts_[name] = strip_comments(read_text_file(entry.path()));
    }
    return s;
}

const std::string& TemplateSet::get(const std::string& name) const {
    auto it = texts_.find(name);
    if (it == texts_.end())
        throw TemplateError("no template named '" + name + "'");
    return it->second;
}

// --- prompts -----------------------------------------------------------------

std::string build_system_prompt(TaskKind task, PromptVariant variant, CvssVersion version,
                                const TemplateSet& templates, const cvss::SchemeStore& schemes) {
    std::string inputs;
    if (includes_description(variant))
        inputs += templates.get("input_description");
    if (auto fragment = fragment_for(granularity_of(variant)); !fragment.empty()) {
        if (!inputs.empty())
            inputs += '\n';
        inputs += templates.get(std::string(fragment));
    }

    if (task == TaskKind::Cwe)
        return render(templates.get("system_cwe"), {{"input_fields", inputs}}) + "\n";

    const auto& scheme = schemes.scheme(version);
    std::map<std::string, std::string> guide_values{{"cvss_version", std::string(to_string(version))}};
    std::string labels;
    for (std::size_t i = 0; i < scheme.bands.size(); ++i) {
        const auto& band = scheme.bands[i];
        guide_values["range_" + std::string(to_string(band.label))] = range_text(band);
        if (i > 0)
            labels += i + 1 == scheme.bands.size() ? " or " : ", ";
        labels += "\"" + std::string(to_string(band.label)) + "\"";
    }
    const std::string guide_name = version == CvssVersion::V2_0 ? "cvss_guide_v2" : "cvss_guide_v3";
    std::string guide = render(templates.get(guide_name), guide_values);
    return render(templates.get("system_severity"), {{"input_fields", inputs},
                                                     {"cvss_version", std::string(to_string(version))},
                                                     {"labels", labels},
                                                     {"cvss_guide", guide}}) +
           "\n";
}

std::string render_hunk(const Hunk& hunk) {
    std::string out = hunk.header + "\n";
    for (const auto& l : hunk.deleted_lines)
        out += "-" + l.text + "\n";
    for (const auto& l : hunk.added_lines)
        out += "+" + l.text + "\n";
    return out;
}

std::string build_user_prompt(const EnrichedRecord& record, PromptVariant variant, const TemplateSet& templates) {
    std::vector<std::string> blocks;
    switch (granularity_of(variant)) {
        case Granularity::None:
            break;
        case Granularity::Files:
            for (const auto& f : record.files)
                if (!f.content.empty())
                    blocks.push_back(tag_block("File", f.filename, f.content));
            break;
        case Granularity::Methods:
            for (const auto& m : record.methods)
                blocks.push_back(tag_block("Method", m.filename, m.body));
            break;
        case Granularity::Hunks:
            for (const auto& h : record.hunks)
                blocks.push_back(tag_block("Hunk", h.filename, render_hunk(h)));
            break;
    }
    if (granularity_of(variant) != Granularity::None && blocks.empty())
        throw MissingGranularity(record.cve + " has no code for variant " + std::string(to_string(variant)));

    std::string out;
    if (includes_description(variant))
        out = render(templates.get("user_description"), {{"description", record.description}});
    for (const auto& b : blocks) {
        if (!out.empty())
            out += "\n\n";
        out += b;
    }
    return out + "\n";
}

PromptPair build_prompt_pair(const EnrichedRecord& record, TaskKind task, PromptVariant variant, CvssVersion version,
                             const TemplateSet& templates, const cvss::SchemeStore& schemes) {
    return {build_system_prompt(task, variant, version, templates, schemes),
            build_user_prompt(record, variant, templates), task, variant, record.cve};
}

// --- tokens ------------------------------------------------------------------

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

TokenEstimator bytes_per_token_estimator(double bytes_per_token) {
    if (!(bytes_per_token > 0) || !std::isfinite(bytes_per_token))
        throw ConfigError("bytes per token must be positive");
    return [bytes_per_token](std::string_view text) {
        return static_cast<std::size_t>(std::ceil(static_cast<double>(text.size()) / bytes_per_token - 1e-9));
    };
}

// --- answers -----------------------------------------------------------------

std::string cwe_answer_text(const CweSet& exact, const CweSet& top) {
    json j{{"exact", cwes_to_json(exact)}, {"top5", cwes_to_json(top)}};
    return j.dump();
}

std::string severity_answer_text(std::optional<SeverityLabel> label, SeverityScore score) {
    json j;
    j["label"] = label ? json(std::string(to_string(*label))) : json(nullptr);
    j["score"] = score_to_json(score);
    return j.dump();
}

std::string assistant_text_for(TaskKind task, const GroundTruth& gt) {
    if (task == TaskKind::Cwe)
        return cwe_answer_text(gt.cwes, gt.cwes);
    return severity_answer_text(gt.label, gt.score);
}

// --- export ------------------------------------------------------------------

ExportResult build_finetune_dataset(const std::vector<LabeledRecord>& records, const ExportOptions& options,
                                    const TemplateSet& templates, const cvss::SchemeStore& schemes) {
    if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0))
        throw ConfigError("train fraction must lie strictly between 0 and 1");
    ExportResult result;
    result.records = records.size();
    const auto train_n = static_cast<std::size_t>(
        std::floor(static_cast<double>(records.size()) * options.train_fraction + 1e-9));
    auto perm = ingest::detail::permutation(records.size(), options.seed);
    std::vector<bool> in_train(records.size(), false);
    for (std::size_t i = 0; i < train_n; ++i)
        in_train[perm[i]] = true;
    result.train_records = train_n;
    result.test_records = records.size() - train_n;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& [record, gt] = records[i];
        const std::string answer = assistant_text_for(options.task, gt);
        for (auto variant : options.variants) {
            ++result.candidate_examples;
            PromptPair pair;
            try {
                pair = build_prompt_pair(record, options.task, variant, gt.version, templates, schemes);
            } catch (const MissingGranularity&) {
                ++result.missing_granularity;
                continue;
            }
            if (pair_tokens(pair, options.estimator) + options.estimator(answer) > options.token_limit) {
                ++result.token_filtered;
                continue;
            }
            FineTuneExample ex{record.cve, variant, std::move(pair.system_text), std::move(pair.user_text), answer};
            (in_train[i] ? result.train : result.test).push_back(std::move(ex));
        }
    }
    return result;
}

std::string finetune_line(const FineTuneExample& example) {
    ordered_json j;
    j["system"] = example.system_text;
    j["user"] = example.user_text;
    j["assistant"] = example.assistant_text;
    return j.dump() + "\n";
}

ExportResult export_finetune_dataset(const std::vector<LabeledRecord>& records, const ExportOptions& options,
                                     const std::filesystem::path& dir, const std::string& prefix,
                                     const TemplateSet& templates, const cvss::SchemeStore& schemes) {
    ExportResult result = build_finetune_dataset(records, options, templates, schemes);
    std::string train, test;
    for (const auto& ex : result.train)
        train += finetune_line(ex);
    for (const auto& ex : result.test)
        test += finetune_line(ex);
    write_text_file(dir / (prefix + "_train.jsonl"), train);
    write_text_file(dir / (prefix + "_test.jsonl"), test);

    json variants = json::array();
    for (auto v : options.variants)
        variants.push_back(std::string(to_string(v)));
    json meta{{"task", std::string(to_string(options.task))},
              {"variants", variants},
              {"seed", options.seed},
              {"train_fraction", options.train_fraction},
              {"token_limit", options.token_limit},
              {"records", {{"total", result.records}, {"train", result.train_records}, {"test", result.test_records}}},
              {"examples",
               {{"candidates", result.candidate_examples},
                {"missing_granularity", result.missing_granularity},
                {"token_filtered", result.token_filtered},
                {"train", result.train.size()},
                {"test", result.test.size()}}},
              {"hyperparameters", {{"epochs", 3}, {"batch_size", 11}, {"learning_rate_multiplier", 2}}}};
    write_text_file(dir / (prefix + "_metadata.json"), dump_json(meta));
    return result;
}

}  // namespace triage::prompt
