#pragma once

// Stage orchestration shared by the command-line tool and the tests. Every
// stage reads its inputs from disk and writes its outputs to disk.

#include "triage/commit.hpp"
#include "triage/dataset.hpp"
#include "triage/evaluation.hpp"
#include "triage/filters.hpp"
#include "triage/inference.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace triage::pipeline {

enum class ProviderKind { Mock, Remote };

struct PipelineConfig {
    filters::FilterConfig filter;
    infer::ProviderConfig provider;
    ProviderKind provider_kind = ProviderKind::Mock;
    std::optional<std::filesystem::path> mock_fixtures;
    std::string mock_default = "decline";

    std::vector<PromptVariant> variants{kEvaluationVariants.begin(), kEvaluationVariants.end()};
    std::vector<Distance> distances{kStandardDistances.begin(), kStandardDistances.end()};
    bool evaluate = true;
    std::uint64_t seed = 0;
    double eval_fraction = 0.5;
    std::optional<std::size_t> sample;
    double bytes_per_token = 4.0;

    std::filesystem::path dataset_dir = "dataset";
    std::filesystem::path results_dir = "results";
    std::filesystem::path reports_dir = "reports";
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> template_dir;

    json cvss_overrides = json::object();
    json extraction_overrides = json::object();

    std::string commit_api = "https://api.github.com";
    std::chrono::milliseconds commit_min_interval{750};
    int commit_max_attempts = 5;
    std::optional<std::filesystem::path> commit_fixtures;

    /// Throws ConfigError.
    void validate() const;
};

/// Applies a JSON config document; unknown keys are rejected.
void apply_config_json(PipelineConfig& config, const json& doc);

/// Sets one key from its text form, as given by a flag or environment
/// variable. Keys: cutoff_date, keep_after_cutoff, token_limit, variants,
/// distances, provider, evaluate, seed, sample.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// Environment variables TRIAGE_<KEY> for the keys accepted by apply_setting.
void apply_environment(PipelineConfig& config, const std::function<const char*(const char*)>& getenv);

bool parse_bool(const std::string& text);  // throws ConfigError

/// Runtime objects derived from the configuration.
struct Toolkit {
    prompt::TemplateSet templates;
    cvss::SchemeStore schemes;
    extract::ExtractionConfig extraction;
    prompt::TokenEstimator estimator;
};

Toolkit make_toolkit(const PipelineConfig& config);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception is rethrown after all workers stop.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// --- build-dataset -----------------------------------------------------------

struct BuildSummary {
    std::size_t input = 0;
    std::size_t passed = 0;
    std::size_t discarded = 0;
    std::size_t evaluation = 0;
    std::size_t finetune = 0;
};

/// Ingests the feeds (duplicates keep their first occurrence), fetches each
/// commit, extracts methods, filters, and writes the dataset store, manifest
/// and non_evaluated.json under config.dataset_dir. The split is drawn over
/// all ingested CVEs in id order, so a record keeps its side when filter
/// settings change. Ground truth comes from `cve2cwe`.
BuildSummary build_dataset(const std::vector<std::filesystem::path>& feeds, const std::filesystem::path& cve2cwe,
                           ingest::Transport& transport, const PipelineConfig& config);

std::filesystem::path non_evaluated_path(const PipelineConfig& config);

// --- dataset access ----------------------------------------------------------

struct DatasetRecord {
    ingest::ManifestEntry entry;
    EnrichedRecord record;
};

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& dataset_dir);

// --- export-finetune -----------------------------------------------------------

enum class ExportScope { Finetune, All };

prompt::ExportResult export_finetune(const PipelineConfig& config, TaskKind task, const std::filesystem::path& out_dir,
                                     ExportScope scope = ExportScope::Finetune);

// --- infer -------------------------------------------------------------------

struct InferSummary {
    std::size_t planned = 0;   // (record, variant) pairs
    std::size_t skipped = 0;   // already present and not forced
    std::size_t written = 0;
    std::size_t with_errors = 0;
};

/// Two inferences per (evaluation record, variant). Variants a record was
/// excluded from are not run. Existing results are kept unless `force`.
InferSummary run_inference(const PipelineConfig& config, infer::Provider& provider, bool force);

/// Mock provider configured from config.mock_default / config.mock_fixtures
/// with ground truth from the dataset manifest.
std::unique_ptr<infer::Provider> make_provider(const PipelineConfig& config);

// --- evaluate ----------------------------------------------------------------

/// Verdicts from persisted raw results only. Languages come from the dataset
/// directory when it exists.
std::vector<eval::EvaluatedRecord> load_evaluations(const PipelineConfig& config);

std::vector<eval::AccuracyReport> run_evaluation(const PipelineConfig& config);

}  // namespace triage::pipeline
