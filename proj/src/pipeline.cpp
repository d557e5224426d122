#include "triage/pipeline.hpp"

#include "triage/error.hpp"
#include "triage/text.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <regex>
#include <thread>

namespace triage::pipeline {

// --- configuration -------------------------------------------------------------

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            auto t = text::trim(cur);
            if (!t.empty())
                out.emplace_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return out;
}

std::vector<PromptVariant> parse_variant_list(const std::vector<std::string>& names) {
    std::vector<PromptVariant> out;
    for (const auto& n : names) {
        auto v = parse_variant(n);
        if (!v)
            throw ConfigError("unknown variant '" + n + "'");
        if (std::find(out.begin(), out.end(), *v) == out.end())
            out.push_back(*v);
    }
    if (out.empty())
        throw ConfigError("variant list is empty");
    return out;
}

std::vector<Distance> parse_distance_list(const std::vector<double>& values) {
    std::vector<Distance> out;
    for (double v : values)
        out.push_back(Distance::from_value(v));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty())
        throw ConfigError("distance list is empty");
    return out;
}

std::chrono::year_month_day parse_cutoff(const std::string& text) {
    static const std::regex shape(R"(\d{4}-\d{2}-\d{2})");
    auto date = text::parse_date(text);
    if (!std::regex_match(text, shape) || !date || !date->ok())
        throw ConfigError("cutoff date must be YYYY-MM-DD, got '" + text + "'");
    return *date;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        if (text.empty() || text[0] == '-')
            throw std::invalid_argument(text);
        auto v = std::stoull(text, &used);
        if (used != text.size())
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + " must be a non-negative integer, got '" + text + "'");
    }
}

ProviderKind parse_provider_kind(const std::string& text) {
    if (text == "mock")
        return ProviderKind::Mock;
    if (text == "remote")
        return ProviderKind::Remote;
    throw ConfigError("provider must be mock or remote, got '" + text + "'");
}

std::set<extract::LanguageId> parse_languages(const json& j) {
    std::set<extract::LanguageId> out;
    for (const auto& item : j) {
        auto l = extract::parse_language(item.get<std::string>());
        if (!l)
            throw ConfigError("unknown language " + item.dump());
        out.insert(*l);
    }
    return out;
}

template <typename T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

}  // namespace

bool parse_bool(const std::string& text) {
    auto t = text::to_lower(text::trim(text));
    if (t == "true" || t == "1" || t == "yes" || t == "on")
        return true;
    if (t == "false" || t == "0" || t == "no" || t == "off")
        return false;
    throw ConfigError("expected a boolean, got '" + text + "'");
}

void PipelineConfig::validate() const {
    filter.validate();
    provider.validate();
    if (variants.empty())
        throw ConfigError("no variants selected");
    if (distances.empty() || !std::is_sorted(distances.begin(), distances.end()))
        throw ConfigError("distances must be non-empty and sorted");
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
        throw ConfigError("eval_fraction must lie strictly between 0 and 1");
    if (!(bytes_per_token > 0.0))
        throw ConfigError("bytes_per_token must be positive");
    auto a = std::filesystem::weakly_canonical(dataset_dir);
    auto b = std::filesystem::weakly_canonical(results_dir);
    auto c = std::filesystem::weakly_canonical(reports_dir);
    if (a == b || a == c || b == c)
        throw ConfigError("dataset, results and reports directories must differ");
}

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
    if (key == "cutoff_date")
        config.filter.cutoff_date = parse_cutoff(value);
    else if (key == "keep_after_cutoff")
        config.filter.keep_after_cutoff = parse_bool(value);
    else if (key == "token_limit")
        config.filter.token_limit = parse_unsigned(key, value);
    else if (key == "variants")
        config.variants = parse_variant_list(split_list(value));
    else if (key == "distances") {
        std::vector<double> values;
        for (const auto& item : split_list(value)) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(item, &used));
                if (used != item.size())
                    throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("distance must be a number, got '" + item + "'");
            }
        }
        config.distances = parse_distance_list(values);
    } else if (key == "provider")
        config.provider_kind = parse_provider_kind(value);
    else if (key == "evaluate")
        config.evaluate = parse_bool(value);
    else if (key == "seed")
        config.seed = parse_unsigned(key, value);
    else if (key == "sample")
        config.sample = parse_unsigned(key, value);
    else
        throw ConfigError("unknown setting '" + key + "'");
}

void apply_environment(PipelineConfig& config, const std::function<const char*(const char*)>& getenv) {
    static const std::pair<const char*, const char*> kVars[] = {
        {"TRIAGE_CUTOFF_DATE", "cutoff_date"}, {"TRIAGE_KEEP_AFTER_CUTOFF", "keep_after_cutoff"},
        {"TRIAGE_TOKEN_LIMIT", "token_limit"}, {"TRIAGE_VARIANTS", "variants"},
        {"TRIAGE_DISTANCES", "distances"},     {"TRIAGE_PROVIDER", "provider"},
        {"TRIAGE_EVALUATE", "evaluate"},       {"TRIAGE_SEED", "seed"},
        {"TRIAGE_SAMPLE", "sample"}};
    for (const auto& [var, key] : kVars)
        if (const char* v = getenv(var); v && *v)
            apply_setting(config, key, v);
}

void apply_config_json(PipelineConfig& config, const json& doc) {
    if (!doc.is_object())
        throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "cutoff_date")
            config.filter.cutoff_date = parse_cutoff(get_as<std::string>(value, key));
        else if (key == "keep_after_cutoff")
            config.filter.keep_after_cutoff = get_as<bool>(value, key);
        else if (key == "token_limit")
            config.filter.token_limit = get_as<std::size_t>(value, key);
        else if (key == "token_scope") {
            auto s = get_as<std::string>(value, key);
            if (s != "variant" && s != "record")
                throw ConfigError("token_scope must be variant or record");
            config.filter.token_scope = s == "record" ? filters::TokenScope::Record : filters::TokenScope::Variant;
        } else if (key == "languages")
            config.filter.supported_languages = parse_languages(value);
        else if (key == "required_variants")
            config.filter.required_variants = parse_variant_list(get_as<std::vector<std::string>>(value, key));
        else if (key == "variants")
            config.variants = parse_variant_list(get_as<std::vector<std::string>>(value, key));
        else if (key == "distances")
            config.distances = parse_distance_list(get_as<std::vector<double>>(value, key));
        else if (key == "evaluate")
            config.evaluate = get_as<bool>(value, key);
        else if (key == "seed")
            config.seed = get_as<std::uint64_t>(value, key);
        else if (key == "eval_fraction")
            config.eval_fraction = get_as<double>(value, key);
        else if (key == "sample")
            config.sample = value.is_null() ? std::nullopt : std::optional(get_as<std::size_t>(value, key));
        else if (key == "bytes_per_token")
            config.bytes_per_token = get_as<double>(value, key);
        else if (key == "dataset_dir")
            config.dataset_dir = get_as<std::string>(value, key);
        else if (key == "results_dir")
            config.results_dir = get_as<std::string>(value, key);
        else if (key == "reports_dir")
            config.reports_dir = get_as<std::string>(value, key);
        else if (key == "cache_dir")
            config.cache_dir = get_as<std::string>(value, key);
        else if (key == "template_dir")
            config.template_dir = get_as<std::string>(value, key);
        else if (key == "cvss_schemes")
            config.cvss_overrides = value;
        else if (key == "extraction")
            config.extraction_overrides = value;
        else if (key == "provider") {
            if (!value.is_object())
                throw ConfigError("provider must be an object");
            for (const auto& [pk, pv] : value.items()) {
                if (pk == "kind")
                    config.provider_kind = parse_provider_kind(get_as<std::string>(pv, pk));
                else if (pk == "endpoint")
                    config.provider.endpoint = get_as<std::string>(pv, pk);
                else if (pk == "path")
                    config.provider.path = get_as<std::string>(pv, pk);
                else if (pk == "model")
                    config.provider.model = get_as<std::string>(pv, pk);
                else if (pk == "temperature")
                    config.provider.temperature = get_as<double>(pv, pk);
                else if (pk == "max_retries")
                    config.provider.max_retries = get_as<int>(pv, pk);
                else if (pk == "timeout_ms")
                    config.provider.timeout = std::chrono::milliseconds(get_as<long>(pv, pk));
                else if (pk == "backoff_ms")
                    config.provider.backoff_base = std::chrono::milliseconds(get_as<long>(pv, pk));
                else if (pk == "concurrency")
                    config.provider.concurrency = get_as<int>(pv, pk);
                else if (pk == "mock_fixtures")
                    config.mock_fixtures = get_as<std::string>(pv, pk);
                else if (pk == "mock_default")
                    config.mock_default = get_as<std::string>(pv, pk);
                else
                    throw ConfigError("unknown provider key '" + pk + "'");
            }
        } else if (key == "commit_api") {
            if (!value.is_object())
                throw ConfigError("commit_api must be an object");
            for (const auto& [ck, cv] : value.items()) {
                if (ck == "base_url")
                    config.commit_api = get_as<std::string>(cv, ck);
                else if (ck == "min_interval_ms")
                    config.commit_min_interval = std::chrono::milliseconds(get_as<long>(cv, ck));
                else if (ck == "max_attempts")
                    config.commit_max_attempts = get_as<int>(cv, ck);
                else if (ck == "fixtures")
                    config.commit_fixtures = get_as<std::string>(cv, ck);
                else
                    throw ConfigError("unknown commit_api key '" + ck + "'");
            }
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

Toolkit make_toolkit(const PipelineConfig& config) {
    Toolkit t{config.template_dir ? prompt::TemplateSet::with_overrides(*config.template_dir)
                                  : prompt::TemplateSet::builtin(),
              cvss::SchemeStore::defaults(), extract::ExtractionConfig{},
              prompt::bytes_per_token_estimator(config.bytes_per_token)};
    if (!config.cvss_overrides.empty())
        t.schemes.apply_overrides(config.cvss_overrides);
    if (!config.extraction_overrides.empty())
        t.extraction.apply_overrides(config.extraction_overrides);
    return t;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const auto count = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            {
                std::lock_guard lock(mu);
                if (failure)
                    return;
            }
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    if (count == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < count; ++t)
            threads.emplace_back(work);
        for (auto& t : threads)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
}

// --- build-dataset -----------------------------------------------------------

std::filesystem::path non_evaluated_path(const PipelineConfig& config) {
    return config.dataset_dir / "non_evaluated.json";
}

BuildSummary build_dataset(const std::vector<std::filesystem::path>& feeds, const std::filesystem::path& cve2cwe,
                           ingest::Transport& transport, const PipelineConfig& config) {
    config.validate();
    Toolkit toolkit = make_toolkit(config);
    if (!std::filesystem::exists(cve2cwe))
        throw IoError("ground-truth file not found: " + cve2cwe.string());
    const ingest::Cve2CweStore store = ingest::parse_cve2cwe(read_json_file(cve2cwe));

    std::vector<ingest::RawCveEntry> entries;
    std::set<std::string> seen;
    for (const auto& feed : feeds) {
        if (!std::filesystem::exists(feed))
            throw IoError("feed not found: " + feed.string());
        for (auto& e : ingest::parse_nvd_feed(read_text_file(feed)))
            if (seen.insert(e.cve).second)
                entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.cve < b.cve; });

    BuildSummary summary;
    summary.input = entries.size();

    std::map<std::string, ingest::SplitSide> side;
    if (!entries.empty()) {
        std::vector<std::string> ids;
        for (const auto& e : entries)
            ids.push_back(e.cve);
        auto split = ingest::split_dataset(ids, config.eval_fraction, config.seed);
        for (const auto& id : split.evaluation)
            side[id] = ingest::SplitSide::Evaluation;
        for (const auto& id : split.finetune)
            side[id] = ingest::SplitSide::Finetune;
    }

    // Ingestion: commit retrieval and method extraction.
    std::vector<std::optional<EnrichedRecord>> assembled(entries.size());
    std::vector<std::optional<filters::DiscardRecord>> ingest_discards(entries.size());
    auto sleeper = [](std::chrono::seconds s) { std::this_thread::sleep_for(s); };
    parallel_for(entries.size(), config.provider.concurrency, [&](std::size_t i) {
        const auto& entry = entries[i];
        auto url = ingest::first_commit_url(entry);
        if (!url) {
            ingest_discards[i] = {entry.cve, filters::DiscardStage::Validity, std::string(filters::reason::kNoCommitUrl)};
            return;
        }
        try {
            auto commit = ingest::fetch_commit_with_retry(*url, transport, config.commit_max_attempts, sleeper);
            EnrichedRecord record = ingest::assemble_record(entry, commit);
            extract::extract_record_methods(record, toolkit.extraction);
            assembled[i] = std::move(record);
        } catch (const Error&) {
            ingest_discards[i] = {entry.cve, filters::DiscardStage::Validity, std::string(filters::reason::kFetchFailed)};
        }
    });

    std::vector<EnrichedRecord> records;
    std::vector<filters::DiscardRecord> discards;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (assembled[i])
            records.push_back(std::move(*assembled[i]));
        else
            discards.push_back(std::move(*ingest_discards[i]));
    }

    filters::FilterConfig filter = config.filter;
    filter.extensions = toolkit.extraction.extensions;
    filters::PromptContext context{&toolkit.templates, &toolkit.schemes, toolkit.estimator};
    auto outcome = filters::run_filters(records, store, filter, context);
    discards.insert(discards.end(), outcome.discarded.begin(), outcome.discarded.end());

    ingest::DatasetStore dataset(config.dataset_dir);
    ingest::DatasetManifest manifest;
    manifest.seed = config.seed;
    manifest.eval_fraction = config.eval_fraction;
    for (const auto& p : outcome.passed) {
        ingest::ManifestEntry e;
        e.cve = p.record.cve;
        e.hash = dataset.put(p.record);
        e.split = side.at(p.record.cve);
        e.ground_truth = p.ground_truth;
        e.variants = p.variants;
        (e.split == ingest::SplitSide::Evaluation ? summary.evaluation : summary.finetune)++;
        manifest.records.push_back(std::move(e));
    }
    dataset.write_manifest(manifest);
    write_text_file(non_evaluated_path(config), dump_json(filters::non_evaluated_report(discards)));

    summary.passed = outcome.passed.size();
    summary.discarded = discards.size();
    return summary;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& dataset_dir) {
    ingest::DatasetStore store(dataset_dir);
    if (!std::filesystem::exists(store.manifest_path()))
        throw IoError("no dataset manifest in " + dataset_dir.string());
    std::vector<DatasetRecord> out;
    for (auto& e : store.read_manifest().records) {
        EnrichedRecord r = store.get(e.hash);
        out.push_back({std::move(e), std::move(r)});
    }
    return out;
}

// --- export ------------------------------------------------------------------

prompt::ExportResult export_finetune(const PipelineConfig& config, TaskKind task, const std::filesystem::path& out_dir,
                                     ExportScope scope) {
    Toolkit toolkit = make_toolkit(config);
    std::vector<prompt::LabeledRecord> records;
    for (auto& d : load_dataset(config.dataset_dir))
        if (scope == ExportScope::All || d.entry.split == ingest::SplitSide::Finetune)
            records.push_back({std::move(d.record), d.entry.ground_truth});
    if (records.empty())
        throw EmptyEvaluationSet("no records to export");
    prompt::ExportOptions options;
    options.task = task;
    options.seed = config.seed;
    options.token_limit = config.filter.token_limit;
    options.estimator = toolkit.estimator;
    const std::string prefix = task == TaskKind::Cwe ? "cwe" : "severity";
    return prompt::export_finetune_dataset(records, options, out_dir, prefix, toolkit.templates, toolkit.schemes);
}

// --- infer -------------------------------------------------------------------

std::unique_ptr<infer::Provider> make_provider(const PipelineConfig& config) {
    if (config.provider_kind == ProviderKind::Remote)
        return std::make_unique<infer::RemoteProvider>(infer::RemoteProvider::from_environment(config.provider));
    std::map<std::string, GroundTruth> gt;
    ingest::DatasetStore store(config.dataset_dir);
    if (std::filesystem::exists(store.manifest_path()))
        for (const auto& e : store.read_manifest().records)
            gt[e.cve] = e.ground_truth;
    auto mode = infer::parse_mock_mode(config.mock_default);
    if (!mode)
        throw ConfigError("unknown mock mode '" + config.mock_default + "'");
    Toolkit toolkit = make_toolkit(config);
    // The scheme store must outlive the provider; defaults unless overridden.
    static std::mutex schemes_mu;
    static std::vector<std::unique_ptr<cvss::SchemeStore>> kept;
    const cvss::SchemeStore* schemes = &cvss::SchemeStore::defaults();
    if (!config.cvss_overrides.empty()) {
        std::lock_guard lock(schemes_mu);
        kept.push_back(std::make_unique<cvss::SchemeStore>(toolkit.schemes));
        schemes = kept.back().get();
    }
    auto mock = std::make_unique<infer::MockProvider>(std::move(gt), *mode, *schemes);
    if (config.mock_fixtures)
        mock->load_fixtures(read_json_file(*config.mock_fixtures));
    return mock;
}

InferSummary run_inference(const PipelineConfig& config, infer::Provider& provider, bool force) {
    config.validate();
    Toolkit toolkit = make_toolkit(config);
    std::vector<DatasetRecord> records;
    for (auto& d : load_dataset(config.dataset_dir))
        if (d.entry.split == ingest::SplitSide::Evaluation)
            records.push_back(std::move(d));
    if (config.sample)
        records = ingest::sample_evaluation(records, *config.sample, config.seed);

    struct Job {
        const DatasetRecord* record;
        PromptVariant variant;
    };
    std::vector<Job> jobs;
    for (const auto& r : records)
        for (auto v : config.variants)
            if (std::find(r.entry.variants.begin(), r.entry.variants.end(), v) != r.entry.variants.end())
                jobs.push_back({&r, v});

    infer::RawResultStore store(config.results_dir);
    InferSummary summary;
    summary.planned = jobs.size();
    infer::RunContext context{&toolkit.templates, &toolkit.schemes,
                              {config.provider.max_retries, config.provider.backoff_base, {}}};
    std::atomic<std::size_t> skipped{0}, written{0}, errored{0};
    parallel_for(jobs.size(), config.provider.concurrency, [&](std::size_t i) {
        const auto& job = jobs[i];
        if (!force && store.contains(job.record->entry.cve, job.variant)) {
            ++skipped;
            return;
        }
        auto result = infer::run_record(job.record->record, job.record->entry.ground_truth, job.variant, provider,
                                        context);
        if (!result.errors.empty())
            ++errored;
        store.write(result);
        ++written;
    });
    summary.skipped = skipped;
    summary.written = written;
    summary.with_errors = errored;
    return summary;
}

// --- evaluate ----------------------------------------------------------------

namespace {

std::vector<Distance> extra_distances(const PipelineConfig& config) {
    std::vector<Distance> out;
    for (auto d : config.distances)
        if (std::find(kStandardDistances.begin(), kStandardDistances.end(), d) == kStandardDistances.end())
            out.push_back(d);
    return out;
}

}  // namespace

std::vector<eval::EvaluatedRecord> load_evaluations(const PipelineConfig& config) {
    if (!std::filesystem::exists(config.results_dir / "manifest.json"))
        throw EmptyEvaluationSet("no raw results in " + config.results_dir.string());
    Toolkit toolkit = make_toolkit(config);
    std::map<std::string, std::string> languages;
    if (std::filesystem::exists(config.dataset_dir / "manifest.json"))
        for (const auto& d : load_dataset(config.dataset_dir))
            if (auto l = eval::dominant_language(d.record, toolkit.extraction.extensions))
                languages[d.entry.cve] = std::string(extract::to_string(*l));

    const auto extra = extra_distances(config);
    std::vector<eval::EvaluatedRecord> out;
    for (auto& r : infer::RawResultStore(config.results_dir).read_all()) {
        if (std::find(config.variants.begin(), config.variants.end(), r.variant) == config.variants.end())
            continue;
        eval::EvaluatedRecord e;
        e.cve = r.cve;
        e.variant = r.variant;
        e.ground_truth = r.ground_truth;
        e.outcome = r.outcome();
        e.verdict = eval::eval_record(e.outcome, e.ground_truth, extra, toolkit.schemes);
        if (auto it = languages.find(r.cve); it != languages.end())
            e.language = it->second;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<eval::AccuracyReport> run_evaluation(const PipelineConfig& config) {
    auto records = load_evaluations(config);
    eval::ReportOptions options;
    options.extra_distances = extra_distances(config);
    return eval::generate_report(std::move(records), options, config.reports_dir);
}

}  // namespace triage::pipeline
