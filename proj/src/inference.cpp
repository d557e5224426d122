#include "triage/inference.hpp"

#include "http.hpp"
#include "triage/error.hpp"
#include "triage/text.hpp"

#include <cstdlib>
#include <thread>

namespace triage::infer {

void ProviderConfig::validate() const {
    if (max_retries < 0)
        throw ConfigError("max_retries must not be negative");
    if (concurrency < 1)
        throw ConfigError("concurrency must be at least 1");
    if (timeout.count() <= 0)
        throw ConfigError("timeout must be positive");
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw ConfigError("temperature must lie in [0, 2]");
}

// --- remote provider ---------------------------------------------------------

RemoteProvider::RemoteProvider(ProviderConfig config, std::string token)
    : config_(std::move(config)), token_(std::move(token)) {
    config_.validate();
}

RemoteProvider RemoteProvider::from_environment(ProviderConfig config) {
    const char* token = std::getenv(config.token_env.c_str());
    if (!token || !*token)
        throw ConfigError("environment variable " + config.token_env + " is not set");
    return RemoteProvider(std::move(config), token);
}

std::string RemoteProvider::complete(const prompt::PromptPair& pair) {
    json body{{"model", config_.model},
              {"temperature", config_.temperature},
              {"messages", json::array({{{"role", "system"}, {"content", pair.system_text}},
                                        {{"role", "user"}, {"content", pair.user_text}}})}};
    http::Options options;
    options.timeout = config_.timeout;
    options.headers["Authorization"] = "Bearer " + token_;
    ingest::HttpResponse resp;
    try {
        resp = http::post(config_.endpoint, config_.path, body.dump(), "application/json", options);
    } catch (const TransportTimeout& e) {
        throw TimeoutError(e.what());
    } catch (const FetchError& e) {
        throw TransientProviderError(e.what());
    }
    if (resp.status == 429 || resp.status >= 500)
        throw TransientProviderError("provider returned HTTP " + std::to_string(resp.status));
    if (resp.status != 200)
        throw ProviderError("provider returned HTTP " + std::to_string(resp.status) + ": " + resp.body);
    try {
        json j = json::parse(resp.body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string())
            throw ProviderError("completion has no text content");
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected provider response: ") + e.what());
    }
}

// --- mock provider -----------------------------------------------------------

std::optional<MockProvider::Mode> parse_mock_mode(std::string_view text) {
    auto t = text::to_lower(text::trim(text));
    if (t == "echo")
        return MockProvider::Mode::Echo;
    if (t == "perturb")
        return MockProvider::Mode::Perturb;
    if (t == "decline")
        return MockProvider::Mode::Decline;
    return std::nullopt;
}

CweSet perturb_cwes(const CweSet& cwes) {
    if (cwes.empty())
        return {CweId(20)};
    CweSet out = cwes;
    CweId smallest = *out.begin();
    out.erase(out.begin());
    std::uint32_t candidate = smallest.value() + 1;
    while (cwes.contains(CweId(candidate)))
        ++candidate;
    out.insert(CweId(candidate));
    return out;
}

MockProvider::MockProvider(std::map<std::string, GroundTruth> ground_truth, Mode default_mode,
                           const cvss::SchemeStore& schemes)
    : ground_truth_(std::move(ground_truth)), default_mode_(default_mode), schemes_(schemes) {}

void MockProvider::load_fixtures(const json& doc) {
    if (!doc.is_object())
        throw ConfigError("mock fixtures must be a JSON object");
    if (doc.contains("default")) {
        auto mode = parse_mock_mode(doc["default"].get<std::string>());
        if (!mode)
            throw ConfigError("unknown mock mode " + doc["default"].dump());
        default_mode_ = *mode;
    }
    if (!doc.contains("records"))
        return;
    for (const auto& [cve, spec] : doc["records"].items()) {
        Script s;
        if (spec.is_string()) {
            auto mode = parse_mock_mode(spec.get<std::string>());
            if (!mode)
                throw ConfigError("unknown mock mode for " + cve + ": " + spec.dump());
            s.mode = *mode;
        } else if (spec.is_object()) {
            s.mode = Mode::Scripted;
            s.cwe_text = spec.value("cwe", decline_text(TaskKind::Cwe));
            s.severity_text = spec.value("severity", decline_text(TaskKind::Severity));
        } else {
            throw ConfigError("mock fixture for " + cve + " must be a mode name or an object");
        }
        scripts_[cve] = std::move(s);
    }
}

void MockProvider::set(const std::string& cve, Script script) { scripts_[cve] = std::move(script); }

std::string MockProvider::decline_text(TaskKind task) {
    return task == TaskKind::Cwe ? prompt::cwe_answer_text({}, {})
                                 : prompt::severity_answer_text(std::nullopt, SeverityScore::declined());
}

std::string MockProvider::complete(const prompt::PromptPair& pair) {
    Script script{default_mode_, {}, {}};
    if (auto it = scripts_.find(pair.cve); it != scripts_.end())
        script = it->second;
    if (script.mode == Mode::Scripted)
        return pair.task == TaskKind::Cwe ? script.cwe_text : script.severity_text;

    auto gt_it = ground_truth_.find(pair.cve);
    if (script.mode == Mode::Decline || gt_it == ground_truth_.end())
        return decline_text(pair.task);
    const GroundTruth& gt = gt_it->second;
    if (script.mode == Mode::Echo)
        return prompt::assistant_text_for(pair.task, gt);

    if (pair.task == TaskKind::Cwe) {
        CweSet wrong = perturb_cwes(gt.cwes);
        return prompt::cwe_answer_text(wrong, wrong);
    }
    const auto& bands = schemes_.scheme(gt.version).bands;
    std::size_t idx = 0;
    while (idx < bands.size() && bands[idx].label != gt.label)
        ++idx;
    const auto& other = bands[(idx + 1) % bands.size()];
    auto score = SeverityScore::from_tenths((other.lo.tenths() + other.hi.tenths()) / 2);
    return prompt::severity_answer_text(other.label, score);
}

// --- calling -----------------------------------------------------------------

CallResult infer(const prompt::PromptPair& pair, Provider& provider, const RetryPolicy& policy) {
    const auto start = std::chrono::steady_clock::now();
    auto delay = policy.backoff_base;
    for (int attempt = 1;; ++attempt) {
        try {
            CallResult r;
            r.text = provider.complete(pair);
            r.attempts = attempt;
            r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
            return r;
        } catch (const TimeoutError&) {
            if (attempt > policy.max_retries)
                throw;
        } catch (const TransientProviderError& e) {
            if (attempt > policy.max_retries)
                throw ProviderError(std::string(e.what()) + " (after " + std::to_string(attempt) + " attempts)");
        }
        if (policy.sleep)
            policy.sleep(delay);
        else
            std::this_thread::sleep_for(delay);
        delay *= 2;
    }
}

// --- formatting --------------------------------------------------------------

namespace {

std::string_view strip_fences(std::string_view text) {
    auto open = text.find("```");
    if (open == std::string_view::npos)
        return text;
    auto body_start = text.find('\n', open);
    if (body_start == std::string_view::npos)
        return text;
    auto close = text.find("```", body_start + 1);
    if (close == std::string_view::npos)
        return text.substr(body_start + 1);
    return text.substr(body_start + 1, close - body_start - 1);
}

json parse_object(std::string_view text) {
    std::string object = extract_json_object(text);
    json j = json::parse(object, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        throw FormatViolation("output is not a JSON object");
    return j;
}

CweSet parse_cwe_list(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw FormatViolation(std::string("missing \"") + key + "\"");
    if (!it->is_array())
        throw FormatViolation(std::string("\"") + key + "\" must be an array");
    CweSet out;
    for (const auto& item : *it) {
        if (item.is_string()) {
            out.insert(CweId::parse(item.get<std::string>()));
        } else if (item.is_number_unsigned() && item.get<std::uint64_t>() > 0 &&
                   item.get<std::uint64_t>() <= 0xFFFFFFFFu) {
            out.insert(CweId(static_cast<std::uint32_t>(item.get<std::uint64_t>())));
        } else {
            throw FormatViolation(std::string("bad entry in \"") + key + "\": " + item.dump());
        }
    }
    return out;
}

}  // namespace

std::string extract_json_object(std::string_view text) {
    std::string_view body = strip_fences(text);
    auto open = body.find('{');
    if (open == std::string_view::npos)
        throw FormatViolation("no JSON object in output");
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < body.size(); ++i) {
        char c = body[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{')
            ++depth;
        else if (c == '}' && --depth == 0)
            return std::string(body.substr(open, i - open + 1));
    }
    throw FormatViolation("unterminated JSON object in output");
}

CweAnswer format_cwe_output(std::string_view text) {
    try {
        json j = parse_object(text);
        CweAnswer a;
        a.exact = parse_cwe_list(j, "exact");
        a.top = parse_cwe_list(j, "top5");
        InferenceOutcome check;
        check.exact_cwes = a.exact;
        check.top_cwes = a.top;
        validate(check);
        return a;
    } catch (const FormatViolation&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatViolation(std::string("invalid CWE output: ") + e.what());
    }
}

SeverityAnswer format_severity_output(std::string_view text) {
    try {
        json j = parse_object(text);
        if (!j.contains("label"))
            throw FormatViolation("missing \"label\"");
        if (!j.contains("score"))
            throw FormatViolation("missing \"score\"");
        SeverityAnswer a;
        const json& label = j["label"];
        if (label.is_string()) {
            a.label = parse_label(text::to_upper(text::trim(label.get<std::string>())));
            if (!a.label)
                throw FormatViolation("unknown severity label " + label.dump());
        } else if (!label.is_null()) {
            throw FormatViolation("severity label must be a string or null");
        }
        a.score = score_from_json(j["score"]);
        return a;
    } catch (const FormatViolation&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatViolation(std::string("invalid severity output: ") + e.what());
    }
}

// --- raw results -------------------------------------------------------------

InferenceOutcome RawResult::outcome() const {
    InferenceOutcome o;
    if (cwe) {
        o.exact_cwes = cwe->exact;
        o.top_cwes = cwe->top;
    }
    if (severity) {
        o.label = severity->label;
        o.score = severity->score;
    }
    o.raw_text_cwe = cwe_raw.value_or("");
    o.raw_text_severity = severity_raw.value_or("");
    return o;
}

namespace {

json optional_text(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> text_or_null(const json& j) {
    if (j.is_null())
        return std::nullopt;
    return j.get<std::string>();
}

}  // namespace

json raw_result_to_json(const RawResult& r) {
    json parsed{{"exact_cwes", nullptr}, {"top_cwes", nullptr}, {"label", nullptr}, {"score", nullptr}};
    if (r.cwe) {
        parsed["exact_cwes"] = cwes_to_json(r.cwe->exact);
        parsed["top_cwes"] = cwes_to_json(r.cwe->top);
    }
    if (r.severity) {
        if (r.severity->label)
            parsed["label"] = std::string(to_string(*r.severity->label));
        parsed["score"] = score_to_json(r.severity->score);
    }
    return json{{"cve", r.cve},
                {"variant", std::string(to_string(r.variant))},
                {"task_inputs",
                 {{"cwe_system", r.cwe_system},
                  {"cwe_user", r.cwe_user},
                  {"severity_system", r.severity_system},
                  {"severity_user", r.severity_user}}},
                {"outputs", {{"cwe_raw", optional_text(r.cwe_raw)}, {"severity_raw", optional_text(r.severity_raw)}}},
                {"parsed", parsed},
                {"ground_truth", r.ground_truth},
                {"cvss_version", std::string(to_string(r.ground_truth.version))},
                {"errors", r.errors},
                {"nvd_description", r.nvd_description}};
}

RawResult raw_result_from_json(const json& j) {
    try {
        RawResult r;
        r.cve = j.at("cve").get<std::string>();
        auto variant = parse_variant(j.at("variant").get<std::string>());
        if (!variant)
            throw MalformedRecord("unknown variant in raw result");
        r.variant = *variant;
        const auto& in = j.at("task_inputs");
        r.cwe_system = in.at("cwe_system").get<std::string>();
        r.cwe_user = in.at("cwe_user").get<std::string>();
        r.severity_system = in.at("severity_system").get<std::string>();
        r.severity_user = in.at("severity_user").get<std::string>();
        r.cwe_raw = text_or_null(j.at("outputs").at("cwe_raw"));
        r.severity_raw = text_or_null(j.at("outputs").at("severity_raw"));
        const auto& p = j.at("parsed");
        if (!p.at("exact_cwes").is_null())
            r.cwe = CweAnswer{cwes_from_json(p["exact_cwes"]), cwes_from_json(p.at("top_cwes"))};
        if (!p.at("score").is_null()) {
            SeverityAnswer a;
            if (!p.at("label").is_null()) {
                a.label = parse_label(p["label"].get<std::string>());
                if (!a.label)
                    throw MalformedRecord("unknown label in raw result");
            }
            a.score = score_from_json(p["score"]);
            r.severity = a;
        }
        r.ground_truth = ground_truth_from_json(j.at("ground_truth"));
        r.errors = j.at("errors").get<std::vector<std::string>>();
        r.nvd_description = j.at("nvd_description").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw MalformedRecord(std::string("malformed raw result: ") + e.what());
    }
}

std::string raw_result_filename(const std::string& cve, PromptVariant variant) {
    return cve + "__" + std::string(to_string(variant)) + ".json";
}

RawResultStore::RawResultStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw IoError("cannot create result directory " + dir_.string() + ": " + ec.message());
    auto manifest = dir_ / "manifest.json";
    if (std::filesystem::exists(manifest))
        manifest_ = read_json_file(manifest).get<std::map<std::string, std::string>>();
}

bool RawResultStore::write(const RawResult& result) {
    const std::string content = dump_json(raw_result_to_json(result));
    const std::string hash = text::sha256_hex(content);
    const std::string name = raw_result_filename(result.cve, result.variant);
    std::lock_guard lock(mu_);
    auto it = manifest_.find(name);
    if (it != manifest_.end() && it->second == hash && std::filesystem::exists(dir_ / name))
        return false;
    write_text_file(dir_ / name, content);
    manifest_[name] = hash;
    save_manifest();
    return true;
}

void RawResultStore::save_manifest() { write_text_file(dir_ / "manifest.json", dump_json(json(manifest_))); }

bool RawResultStore::contains(const std::string& cve, PromptVariant variant) const {
    std::lock_guard lock(mu_);
    auto name = raw_result_filename(cve, variant);
    return manifest_.contains(name) && std::filesystem::exists(dir_ / name);
}

RawResult RawResultStore::read(const std::string& cve, PromptVariant variant) const {
    return raw_result_from_json(read_json_file(dir_ / raw_result_filename(cve, variant)));
}

std::vector<RawResult> RawResultStore::read_all() const {
    std::vector<std::string> names;
    {
        std::lock_guard lock(mu_);
        for (const auto& [name, _] : manifest_)
            names.push_back(name);
    }
    std::vector<RawResult> out;
    for (const auto& name : names)
        out.push_back(raw_result_from_json(read_json_file(dir_ / name)));
    return out;
}

bool write_raw_result(const RawResult& result, const std::filesystem::path& dir) {
    RawResultStore store(dir);
    return store.write(result);
}

// --- one record ----------------------------------------------------------------

RawResult run_record(const EnrichedRecord& record, const GroundTruth& gt, PromptVariant variant, Provider& provider,
                     const RunContext& context) {
    RawResult r;
    r.cve = record.cve;
    r.variant = variant;
    r.ground_truth = gt;
    r.nvd_description = record.description;

    for (auto task : {TaskKind::Cwe, TaskKind::Severity}) {
        const std::string tag = task == TaskKind::Cwe ? "cwe" : "severity";
        prompt::PromptPair pair;
        try {
            pair = prompt::build_prompt_pair(record, task, variant, gt.version, *context.templates,
                                             *context.schemes);
        } catch (const Error& e) {
            r.errors.push_back(tag + ": prompt: " + e.what());
            continue;
        }
        (task == TaskKind::Cwe ? r.cwe_system : r.severity_system) = pair.system_text;
        (task == TaskKind::Cwe ? r.cwe_user : r.severity_user) = pair.user_text;

        std::string raw;
        try {
            raw = infer(pair, provider, context.retry).text;
        } catch (const ProviderError& e) {
            r.errors.push_back(tag + ": provider: " + e.what());
            continue;
        }
        (task == TaskKind::Cwe ? r.cwe_raw : r.severity_raw) = raw;
        try {
            if (task == TaskKind::Cwe)
                r.cwe = format_cwe_output(raw);
            else
                r.severity = format_severity_output(raw);
        } catch (const FormatViolation& e) {
            r.errors.push_back(tag + ": format: " + e.what());
        }
    }
    return r;
}

}  // namespace triage::infer
