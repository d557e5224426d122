#pragma once

// Prompt construction for the two inference tasks, token estimation and
// fine-tuning export.

#include "triage/cvss.hpp"
#include "triage/json_io.hpp"
#include "triage/model.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace triage::prompt {

struct PromptPair {
    std::string system_text;
    std::string user_text;
    TaskKind task = TaskKind::Cwe;
    PromptVariant variant = PromptVariant::Description;
    std::string cve;
};

/// Named template texts. Lines starting with "##" are comments and never reach
/// a prompt.
class TemplateSet {
public:
    /// Templates compiled into the binary from the templates/ directory.
    static const TemplateSet& builtin();

    /// Built-in templates with every `<name>.txt` found in `dir` replacing its
    /// counterpart. Unknown names are rejected with ConfigError.
    static TemplateSet with_overrides(const std::filesystem::path& dir);

    const std::string& get(const std::string& name) const;

private:
    std::map<std::string, std::string> texts_;
};

std::string build_system_prompt(TaskKind task, PromptVariant variant, CvssVersion version,
                                const TemplateSet& templates = TemplateSet::builtin(),
                                const cvss::SchemeStore& schemes = cvss::SchemeStore::defaults());

/// Description (for description-bearing variants) followed by one tagged block
/// per file, method or hunk. Throws MissingGranularity when the variant needs
/// code and the record has none at that granularity.
std::string build_user_prompt(const EnrichedRecord& record, PromptVariant variant,
                              const TemplateSet& templates = TemplateSet::builtin());

PromptPair build_prompt_pair(const EnrichedRecord& record, TaskKind task, PromptVariant variant,
                             CvssVersion version, const TemplateSet& templates = TemplateSet::builtin(),
                             const cvss::SchemeStore& schemes = cvss::SchemeStore::defaults());

/// Renders a hunk as its header followed by "-" and "+" lines.
std::string render_hunk(const Hunk& hunk);

// --- token estimation --------------------------------------------------------

using TokenEstimator = std::function<std::size_t(std::string_view)>;

/// ceil(bytes / 4).
std::size_t estimate_tokens(std::string_view text);

/// ceil(bytes / bytes_per_token); bytes_per_token must be positive.
TokenEstimator bytes_per_token_estimator(double bytes_per_token);

inline std::size_t pair_tokens(const PromptPair& pair, const TokenEstimator& estimator) {
    return estimator(pair.system_text) + estimator(pair.user_text);
}

// --- assistant answers ---------------------------------------------------------

/// `{"exact":[...],"top5":[...]}`
std::string cwe_answer_text(const CweSet& exact, const CweSet& top);
/// `{"label":"HIGH","score":7.5}`, or `{"label":null,"score":-1}` for a decline.
std::string severity_answer_text(std::optional<SeverityLabel> label, SeverityScore score);

/// The answer a fine-tuned model should give: top5 equals exact.
std::string assistant_text_for(TaskKind task, const GroundTruth& gt);

// --- fine-tune export --------------------------------------------------------

struct FineTuneExample {
    std::string cve;
    PromptVariant variant = PromptVariant::Description;
    std::string system_text;
    std::string user_text;
    std::string assistant_text;
};

struct LabeledRecord {
    EnrichedRecord record;
    GroundTruth ground_truth;
};

struct ExportOptions {
    TaskKind task = TaskKind::Cwe;
    std::vector<PromptVariant> variants{kAllVariants.begin(), kAllVariants.end()};
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    std::size_t token_limit = 4096;
    TokenEstimator estimator = estimate_tokens;
};

struct ExportResult {
    std::vector<FineTuneExample> train;
    std::vector<FineTuneExample> test;
    std::size_t records = 0;
    std::size_t train_records = 0;
    std::size_t test_records = 0;
    std::size_t candidate_examples = 0;   // records x variants
    std::size_t missing_granularity = 0;  // variant payload empty
    std::size_t token_filtered = 0;       // over the token limit
};

/// Builds examples in memory. Records are split before examples are formed,
/// so all variants of one record land on the same side; the train side gets
/// floor(n * train_fraction) records.
ExportResult build_finetune_dataset(const std::vector<LabeledRecord>& records, const ExportOptions& options,
                                    const TemplateSet& templates = TemplateSet::builtin(),
                                    const cvss::SchemeStore& schemes = cvss::SchemeStore::defaults());

/// Writes `<prefix>_train.jsonl`, `<prefix>_test.jsonl` and `<prefix>_metadata.json` in `dir`.
ExportResult export_finetune_dataset(const std::vector<LabeledRecord>& records, const ExportOptions& options,
                                     const std::filesystem::path& dir, const std::string& prefix,
                                     const TemplateSet& templates = TemplateSet::builtin(),
                                     const cvss::SchemeStore& schemes = cvss::SchemeStore::defaults());

/// One JSONL line: `{"system":...,"user":...,"assistant":...}`.
std::string finetune_line(const FineTuneExample& example);

}  // namespace triage::prompt
