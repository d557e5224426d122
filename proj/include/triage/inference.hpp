#pragma once

// Language-model providers, the retrying call wrapper, output formatting and
// raw-result persistence.

#include "triage/json_io.hpp"
#include "triage/prompting.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace triage::infer {

struct ProviderConfig {
    std::string endpoint = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int max_retries = 3;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds backoff_base{1000};
    int concurrency = 4;
    std::string token_env = "TRIAGE_API_TOKEN";

    /// Throws ConfigError.
    void validate() const;
};

class Provider {
public:
    virtual ~Provider() = default;
    /// Completion text for one independent system/user exchange. Throws
    /// TransientProviderError, TimeoutError or ProviderError.
    virtual std::string complete(const prompt::PromptPair& pair) = 0;
};

/// Chat-completions style endpoint: POSTs
/// `{"model", "temperature", "messages": [{"role": "system"}, {"role": "user"}]}`
/// and reads `choices[0].message.content`.
class RemoteProvider : public Provider {
public:
    RemoteProvider(ProviderConfig config, std::string token);
    /// Reads the token from the environment variable named in the config.
    static RemoteProvider from_environment(ProviderConfig config);

    std::string complete(const prompt::PromptPair& pair) override;

private:
    ProviderConfig config_;
    std::string token_;
};

/// Offline provider for tests and dry runs.
///   echo     answers with the ground truth in the assistant template
///   perturb  replaces one ground-truth CWE and moves the severity to another band
///   decline  answers with the default outputs
///   scripted answers with fixed text per task
/// Unknown CVEs get the default mode.
class MockProvider : public Provider {
public:
    enum class Mode { Echo, Perturb, Decline, Scripted };

    struct Script {
        Mode mode = Mode::Decline;
        std::string cwe_text;
        std::string severity_text;
    };

    MockProvider(std::map<std::string, GroundTruth> ground_truth, Mode default_mode = Mode::Decline,
                 const cvss::SchemeStore& schemes = cvss::SchemeStore::defaults());

    /// Fixture document: `{"default": "decline", "records": {"CVE-...": "echo" |
    /// "perturb" | "decline" | {"cwe": "...", "severity": "..."}}}`.
    void load_fixtures(const json& doc);
    void set(const std::string& cve, Script script);

    std::string complete(const prompt::PromptPair& pair) override;

    static std::string decline_text(TaskKind task);

private:
    std::map<std::string, GroundTruth> ground_truth_;
    std::map<std::string, Script> scripts_;
    Mode default_mode_;
    const cvss::SchemeStore& schemes_;
};

std::optional<MockProvider::Mode> parse_mock_mode(std::string_view text);

/// The CWE set with its smallest id replaced by the next id not in the set.
CweSet perturb_cwes(const CweSet& cwes);

// --- calling -----------------------------------------------------------------

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000};  // doubled after every failed attempt
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

struct CallResult {
    std::string text;
    int attempts = 0;
    std::chrono::milliseconds latency{0};
};

/// Retries transient failures and timeouts with exponential backoff. After the
/// last retry the final error propagates (TimeoutError or ProviderError);
/// non-transient provider errors are not retried.
CallResult infer(const prompt::PromptPair& pair, Provider& provider, const RetryPolicy& policy = {});

// --- formatting --------------------------------------------------------------

struct CweAnswer {
    CweSet exact;
    CweSet top;
};

struct SeverityAnswer {
    std::optional<SeverityLabel> label;
    SeverityScore score = SeverityScore::declined();
};

/// Strips code fences and prose around the first JSON object, then parses
/// `{"exact": [...], "top5": [...]}`. Every failure is a FormatViolation.
CweAnswer format_cwe_output(std::string_view text);

/// Parses `{"label": ..., "score": ...}`; the score may be a numeric string.
SeverityAnswer format_severity_output(std::string_view text);

/// The JSON object embedded in provider text, or FormatViolation.
std::string extract_json_object(std::string_view text);

// --- raw results -------------------------------------------------------------

struct RawResult {
    std::string cve;
    PromptVariant variant = PromptVariant::Description;
    std::string cwe_system;
    std::string cwe_user;
    std::string severity_system;
    std::string severity_user;
    std::optional<std::string> cwe_raw;
    std::optional<std::string> severity_raw;
    std::optional<CweAnswer> cwe;            // parsed, when the CWE output was valid
    std::optional<SeverityAnswer> severity;  // parsed, when the severity output was valid
    GroundTruth ground_truth;
    std::vector<std::string> errors;
    std::string nvd_description;

    /// Outcome used by evaluation; failed tasks contribute declines.
    InferenceOutcome outcome() const;
};

json raw_result_to_json(const RawResult& result);
RawResult raw_result_from_json(const json& j);

/// `<cve>__<VARIANT>.json`.
std::string raw_result_filename(const std::string& cve, PromptVariant variant);

/// Directory of raw results with `manifest.json` mapping file names to the
/// SHA-256 of their content. Writes are skipped when the content is unchanged.
class RawResultStore {
public:
    explicit RawResultStore(std::filesystem::path dir);

    /// Returns true when the file was (re)written. Throws IoError.
    bool write(const RawResult& result);
    bool contains(const std::string& cve, PromptVariant variant) const;
    RawResult read(const std::string& cve, PromptVariant variant) const;
    std::vector<RawResult> read_all() const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    void save_manifest();

    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> manifest_;
};

/// Single-shot form of RawResultStore::write.
bool write_raw_result(const RawResult& result, const std::filesystem::path& dir);

struct RunContext {
    const prompt::TemplateSet* templates = &prompt::TemplateSet::builtin();
    const cvss::SchemeStore* schemes = &cvss::SchemeStore::defaults();
    RetryPolicy retry;
};

/// Both inferences for one (record, variant); failures are recorded in
/// `errors` rather than thrown.
RawResult run_record(const EnrichedRecord& record, const GroundTruth& gt, PromptVariant variant, Provider& provider,
                     const RunContext& context = {});

}  // namespace triage::infer
