#include "doctest.h"

#include "../support/scenario.hpp"
#include "../support/tempdir.hpp"

#include "triage/error.hpp"
#include "triage/pipeline.hpp"

#include <atomic>
#include <map>

using namespace triage;
using namespace triage::pipeline;
using testing_support::TempDir;

namespace {

PipelineConfig config_in(const TempDir& dir) {
    PipelineConfig c;
    c.dataset_dir = dir / "dataset";
    c.results_dir = dir / "results";
    c.reports_dir = dir / "reports";
    c.provider.concurrency = 2;
    return c;
}

BuildSummary build(const TempDir& dir, const std::vector<scenario::RecordSpec>& specs, const PipelineConfig& c) {
    auto world = scenario::build_world(specs);
    world.write(dir.path());
    auto transport = world.transport();
    return build_dataset({dir / "feed.json"}, dir / "cve2cwe.json", *transport, c);
}

std::map<std::string, std::string> read_dir(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        out[e.path().filename().string()] = read_text_file(e.path());
    return out;
}

}  // namespace

TEST_CASE("config precedence: flags over environment over file over defaults") {
    PipelineConfig c;
    CHECK(c.filter.token_limit == 4096);
    apply_config_json(c, json{{"token_limit", 1000}, {"seed", 7}, {"variants", {"DESCRIPTION", "DESCRIPTION_FILES"}}});
    CHECK(c.filter.token_limit == 1000);
    CHECK(c.seed == 7);
    CHECK(c.variants.size() == 2);

    std::map<std::string, std::string> env{{"TRIAGE_TOKEN_LIMIT", "2000"}, {"TRIAGE_KEEP_AFTER_CUTOFF", "false"}};
    apply_environment(c, [&](const char* name) -> const char* {
        auto it = env.find(name);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    CHECK(c.filter.token_limit == 2000);
    CHECK_FALSE(c.filter.keep_after_cutoff);
    CHECK(c.seed == 7);

    apply_setting(c, "token_limit", "3000");
    CHECK(c.filter.token_limit == 3000);
}

TEST_CASE("config rejects bad values") {
    PipelineConfig c;
    CHECK_THROWS_AS(apply_config_json(c, json{{"no_such_key", 1}}), ConfigError);
    CHECK_THROWS_AS(apply_config_json(c, json{{"token_limit", "many"}}), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "cutoff_date", "2021-13-01"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "cutoff_date", "2021-09-01T00:00:00Z"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "variants", "NOPE"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "provider", "other"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "seed", "-1"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "distances", "0"), ConfigError);
    CHECK_THROWS_AS(parse_bool("maybe"), ConfigError);

    apply_setting(c, "distances", "1.5,0.5,2.0");
    REQUIRE(c.distances.size() == 3);
    CHECK(c.distances.front() == Distance::from_tenths(5));
    CHECK(c.distances.back() == Distance::from_tenths(20));

    c.results_dir = c.dataset_dir;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<std::atomic<int>> seen(100);
    parallel_for(seen.size(), 4, [&](std::size_t i) { seen[i]++; });
    for (const auto& s : seen)
        CHECK(s.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 5)
                            throw IoError("boom");
                    }),
                    IoError);
}

TEST_CASE("build_dataset: ten records, three failing validity") {
    TempDir dir("build");
    auto specs = scenario::clean_specs(10);
    specs[2].cwes.clear();
    specs[5].in_ground_truth = false;
    specs[7].filename = "src/lib.rs";
    auto c = config_in(dir);
    auto s = build(dir, specs, c);
    CHECK(s.input == 10);
    CHECK(s.passed == 7);
    CHECK(s.discarded == 3);
    CHECK(s.evaluation + s.finetune == 7);

    auto report = filters::read_non_evaluated_report(read_json_file(non_evaluated_path(c)));
    REQUIRE(report.size() == 3);
    CHECK(report[0].reason == filters::reason::kEmptyCwe);
    CHECK(report[1].reason == filters::reason::kMissingGroundTruth);
    CHECK(report[2].reason == filters::reason::kUnsupportedLanguage);

    auto data = load_dataset(c.dataset_dir);
    CHECK(data.size() == 7);
    for (const auto& d : data) {
        CHECK(d.record.cve == d.entry.cve);
        CHECK(d.entry.variants.size() == 4);
        CHECK_FALSE(d.record.methods.empty());
    }
}

TEST_CASE("build_dataset: split side does not depend on filter settings") {
    TempDir a("split-a"), b("split-b");
    auto specs = scenario::clean_specs(20);
    auto ca = config_in(a);
    build(a, specs, ca);
    specs[3].cwes.clear();
    specs[11].cwes.clear();
    auto cb = config_in(b);
    build(b, specs, cb);
    std::map<std::string, ingest::SplitSide> side;
    for (const auto& d : load_dataset(ca.dataset_dir))
        side[d.entry.cve] = d.entry.split;
    for (const auto& d : load_dataset(cb.dataset_dir))
        CHECK(side.at(d.entry.cve) == d.entry.split);
}

TEST_CASE("build_dataset: missing inputs and ingestion failures") {
    TempDir dir("inputs");
    auto c = config_in(dir);
    auto world = scenario::build_world(scenario::clean_specs(2));
    world.write(dir.path());
    auto transport = world.transport();
    CHECK_THROWS_AS(build_dataset({dir / "feed.json"}, dir / "absent.json", *transport, c), IoError);
    CHECK_THROWS_AS(build_dataset({dir / "absent.json"}, dir / "cve2cwe.json", *transport, c), IoError);

    write_text_file(dir / "empty.json", R"({"vulnerabilities": []})");
    auto s = build_dataset({dir / "empty.json"}, dir / "cve2cwe.json", *transport, c);
    CHECK(s.input == 0);
    CHECK(load_dataset(c.dataset_dir).empty());

    auto specs = scenario::clean_specs(3);
    specs[1].has_commit = false;
    auto w2 = scenario::build_world(specs);
    w2.write(dir.path());
    auto partial = w2.transport();
    auto s2 = build_dataset({dir / "feed.json"}, dir / "cve2cwe.json", *partial, c);
    CHECK(s2.passed == 2);
    auto report = filters::read_non_evaluated_report(read_json_file(non_evaluated_path(c)));
    REQUIRE(report.size() == 1);
    CHECK(report[0].reason == filters::reason::kNoCommitUrl);
}

TEST_CASE("build_dataset: duplicate feed entries keep the first") {
    TempDir dir("dupes");
    auto c = config_in(dir);
    auto world = scenario::build_world(scenario::clean_specs(4));
    auto items = world.feed["vulnerabilities"];
    world.feed["vulnerabilities"].push_back(items[0]);
    world.write(dir.path());
    auto transport = world.transport();
    auto s = build_dataset({dir / "feed.json", dir / "feed.json"}, dir / "cve2cwe.json", *transport, c);
    CHECK(s.input == 4);
    CHECK(s.passed == 4);
}

TEST_CASE("inference and evaluation with an echo mock") {
    TempDir dir("infer");
    auto c = config_in(dir);
    c.mock_default = "echo";
    build(dir, scenario::clean_specs(12), c);
    auto provider = make_provider(c);

    auto first = run_inference(c, *provider, false);
    std::size_t evaluation = 0;
    for (const auto& d : load_dataset(c.dataset_dir))
        evaluation += d.entry.split == ingest::SplitSide::Evaluation;
    CHECK(first.planned == evaluation * 4);
    CHECK(first.written == first.planned);
    CHECK(first.with_errors == 0);

    auto again = run_inference(c, *provider, false);
    CHECK(again.written == 0);
    CHECK(again.skipped == again.planned);

    auto forced = run_inference(c, *provider, true);
    CHECK(forced.written == forced.planned);

    auto reports = run_evaluation(c);
    for (const auto& r : reports)
        if (r.criterion == "CWE_PE" || r.criterion == "SEV_LABEL" || r.criterion == "TOTAL_PM_DIST")
            CHECK(r.accuracy == 1.0);
    auto bundle = read_dir(c.reports_dir);
    run_evaluation(c);
    CHECK(read_dir(c.reports_dir) == bundle);
    CHECK(bundle.count("report.md"));
    CHECK(bundle.count("summary.json"));
}

TEST_CASE("inference sample and variant selection") {
    TempDir dir("sample");
    auto c = config_in(dir);
    c.mock_default = "echo";
    build(dir, scenario::clean_specs(12), c);
    c.sample = 2;
    c.variants = {PromptVariant::Description};
    auto provider = make_provider(c);
    auto s = run_inference(c, *provider, false);
    CHECK(s.planned == 2);
    c.sample = 1000;
    CHECK_THROWS_AS(run_inference(c, *provider, false), SampleTooLarge);
}

TEST_CASE("evaluation without results is fatal") {
    TempDir dir("noresults");
    auto c = config_in(dir);
    CHECK_THROWS_AS(run_evaluation(c), EmptyEvaluationSet);
}

TEST_CASE("export_finetune writes separate file pairs per task") {
    TempDir dir("export");
    auto c = config_in(dir);
    build(dir, scenario::clean_specs(16), c);
    std::size_t finetune = 0;
    for (const auto& d : load_dataset(c.dataset_dir))
        finetune += d.entry.split == ingest::SplitSide::Finetune;
    auto cwe = export_finetune(c, TaskKind::Cwe, dir / "ft");
    CHECK(cwe.records == finetune);
    CHECK(cwe.candidate_examples == finetune * 7);
    auto sev = export_finetune(c, TaskKind::Severity, dir / "ft");
    CHECK(sev.records == finetune);
    for (const char* f : {"cwe_train.jsonl", "cwe_test.jsonl", "cwe_metadata.json", "severity_train.jsonl",
                          "severity_test.jsonl", "severity_metadata.json"})
        CHECK(std::filesystem::exists(dir / "ft" / f));
    auto all = export_finetune(c, TaskKind::Cwe, dir / "ft-all", ExportScope::All);
    CHECK(all.records == 16);
}
