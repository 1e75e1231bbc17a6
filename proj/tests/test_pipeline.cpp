#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "parsrec/corpus.hpp"
#include "parsrec/errors.hpp"
#include "parsrec/evaluate.hpp"
#include "parsrec/hash.hpp"
#include "parsrec/parsers.hpp"
#include "parsrec/pipeline.hpp"
#include "parsrec/synth.hpp"

using namespace parsrec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

SynthParams uniform_styles(std::size_t n_docs, std::size_t refs_per_doc, std::uint64_t seed,
                           const NoiseKnobs& noise) {
    SynthParams p;
    for (const auto& s : default_styles(noise)) {
        SynthStyleSpec spec = s;
        spec.weight = 1.0;  // equal dominant-style shares
        p.styles.push_back(spec);
    }
    p.n_docs = n_docs;
    p.refs_per_doc = refs_per_doc;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("synth is deterministic down to the bytes") {
    TempDir dir("parsrec_synth_det");
    RunManifest manifest = RunManifest::defaults(123);
    manifest.synth.n_docs = 30;
    manifest.synth.refs_per_doc = 6;
    const auto h1 = stage_synth(manifest, dir.file("a.jsonl"));
    const auto h2 = stage_synth(manifest, dir.file("b.jsonl"));
    CHECK(h1 == h2);
    CHECK(hash_file(dir.file("a.jsonl")) == hash_file(dir.file("b.jsonl")));

    RunManifest other = manifest;
    other.synth.seed = 124;
    const auto h3 = stage_synth(other, dir.file("c.jsonl"));
    CHECK(h1 != h3);
}

TEST_CASE("synth sizes and exact dominant-style allocation") {
    // 5 styles x 200 docs x 20 refs; zero noise so the rendered style equals
    // the dominant style, identifiable by its own parser scoring 1.0
    const auto params = uniform_styles(200, 20, 3, NoiseKnobs{0.0, 0.0, 0.0});
    const auto corpus = synth(params);
    CHECK(corpus.size() == 20000);

    std::map<std::string, std::size_t> by_style;
    for (std::size_t i = 0; i < corpus.records.size(); i += 20) {  // sample one ref per doc
        const auto& r = corpus.records[i];
        for (const auto& style : {"bracket", "apa", "semi", "dotnum", "plain"}) {
            const auto out = builtin_parse(style, r.raw);
            if (score_reference(match_fields(out.fields, *r.truth)).f1 == 1.0) {
                ++by_style[style];
                break;
            }
        }
    }
    std::size_t total = 0;
    for (const auto& [style, count] : by_style) {
        CHECK(count == 40);  // 200 docs over 5 styles, exact largest-remainder split
        total += count;
    }
    CHECK(total == 200);
}

TEST_CASE("with mixing noise the rendered styles scatter around the dominant share") {
    const auto params = uniform_styles(100, 10, 11, NoiseKnobs{0.0, 0.0, 0.25});
    const auto corpus = synth(params);
    std::map<std::string, std::size_t> rendered;
    for (const auto& r : corpus.records) {
        for (const auto& style : {"bracket", "apa", "semi", "dotnum", "plain"}) {
            const auto out = builtin_parse(style, r.raw);
            if (score_reference(match_fields(out.fields, *r.truth)).f1 == 1.0) {
                ++rendered[style];
                break;
            }
        }
    }
    // every style appears; no style dominates beyond its share plus noise
    for (const auto& style : {"bracket", "apa", "semi", "dotnum", "plain"}) {
        CHECK(rendered[style] > 100);
        CHECK(rendered[style] < 300);
    }
}

TEST_CASE("zero-noise corpus is essentially solvable by the matching parsers") {
    const auto params = uniform_styles(40, 10, 5, NoiseKnobs{0.0, 0.0, 0.0});
    const auto corpus = synth(params);
    // for each ref the best builtin must reach F1 1.0
    double best_sum = 0.0;
    for (const auto& r : corpus.records) {
        double best = 0.0;
        for (const auto& d : builtin_registry().parsers) {
            const auto out = builtin_parse(d.parser_id, r.raw);
            best = std::max(best, score_reference(match_fields(out.fields, *r.truth)).f1);
        }
        best_sum += best;
    }
    CHECK(best_sum / corpus.size() >= 0.999);
}

TEST_CASE("manifest JSON round trip") {
    RunManifest m = RunManifest::defaults(42);
    m.synth.n_docs = 77;
    m.vocab_size = 99;
    m.logistic.l2 = 2.5;
    m.voting_threshold = 4;
    const auto back = manifest_from_json(manifest_to_json(m));
    CHECK(back.seed == 42);
    CHECK(back.synth.n_docs == 77);
    CHECK(back.synth.styles.size() == 5);
    CHECK(back.vocab_size == 99);
    CHECK(back.logistic.l2 == 2.5);
    CHECK(back.voting_threshold == 4);
    CHECK(back.registry_ids == m.registry_ids);
}

TEST_CASE("full pipeline through the stage functions") {
    TempDir dir("parsrec_stage_test");
    RunManifest manifest = RunManifest::defaults(7);
    manifest.synth.n_docs = 60;
    manifest.synth.refs_per_doc = 6;
    manifest.vocab_size = 60;

    stage_synth(manifest, dir.file("corpus.jsonl"));
    stage_split(dir.file("corpus.jsonl"), manifest.fractions, manifest.seed, dir.file("split.json"));

    const auto registry = builtin_registry();
    stage_run_parsers(dir.file("corpus.jsonl"), dir.file("split.json"), Split::Meta, registry, "",
                      dir.file("meta.jsonl"));
    stage_run_parsers(dir.file("corpus.jsonl"), dir.file("split.json"), Split::Test, registry, "",
                      dir.file("test.jsonl"));

    TrainParams train;
    train.vocab_size = manifest.vocab_size;
    train.seed = manifest.seed;
    stage_train(dir.file("corpus.jsonl"), dir.file("split.json"), dir.file("meta.jsonl"), "ref",
                train, dir.file("ref_bundle"));
    stage_train(dir.file("corpus.jsonl"), dir.file("split.json"), dir.file("meta.jsonl"), "field",
                train, dir.file("field_bundle"));
    stage_train(dir.file("corpus.jsonl"), dir.file("split.json"), dir.file("meta.jsonl"),
                "baselines", train, dir.file("base_bundle"));

    EvaluateInputs inputs;
    inputs.corpus_path = dir.file("corpus.jsonl");
    inputs.split_path = dir.file("split.json");
    inputs.test_table_path = dir.file("test.jsonl");
    inputs.ref_bundle_dir = dir.file("ref_bundle");
    inputs.field_bundle_dir = dir.file("field_bundle");
    inputs.baselines_path = dir.file("base_bundle/baselines.json");
    inputs.systems = {kSystemSingleBest, kSystemHybrid, kSystemVoting, kSystemRef, kSystemField};
    const auto summary = stage_evaluate(inputs);

    REQUIRE(summary.systems.size() == 5);
    // every requested pair gets a t-test
    CHECK(summary.ttests.size() == 10);
    // recommenders report their choice distribution, which sums to 1
    const auto& ref_report = summary.report_for(kSystemRef);
    REQUIRE_FALSE(ref_report.choice_distribution.empty());
    double share_sum = 0.0;
    for (const auto& [_, share] : ref_report.choice_distribution) share_sum += share;
    CHECK(share_sum == doctest::Approx(1.0).epsilon(1e-12));
    // learned recommenders beat the single parser on this corpus
    CHECK(ref_report.micro_f1 > summary.report_for(kSystemSingleBest).micro_f1);

    // summary JSON round trip preserves the numbers
    const auto back = summary_from_json(summary_to_json(summary));
    CHECK(back.systems.size() == 5);
    CHECK(back.report_for(kSystemRef).micro_f1 == doctest::Approx(ref_report.micro_f1));
    CHECK(render_report_text(back).find("ParsRec_Ref") != std::string::npos);
}

TEST_CASE("stale artifacts are refused") {
    TempDir dir("parsrec_stale_test");
    RunManifest manifest = RunManifest::defaults(9);
    manifest.synth.n_docs = 12;
    manifest.synth.refs_per_doc = 4;
    stage_synth(manifest, dir.file("corpus.jsonl"));
    stage_split(dir.file("corpus.jsonl"), manifest.fractions, 9, dir.file("split.json"));

    SUBCASE("corpus modified after the split was computed") {
        std::ofstream app(dir.file("corpus.jsonl"), std::ios::app);
        app << R"({"doc_id":"dx","ref_id":"rx","ref":"Injected, R. (2000). X. Y, 1, 2100-2110."})"
            << "\n";
        app.close();
        CHECK_THROWS_AS(stage_run_parsers(dir.file("corpus.jsonl"), dir.file("split.json"),
                                          Split::Meta, builtin_registry(), "",
                                          dir.file("meta.jsonl")),
                        StaleArtifact);
    }

    SUBCASE("meta table presented as the test table") {
        stage_run_parsers(dir.file("corpus.jsonl"), dir.file("split.json"), Split::Meta,
                          builtin_registry(), "", dir.file("meta.jsonl"));
        EvaluateInputs inputs;
        inputs.corpus_path = dir.file("corpus.jsonl");
        inputs.split_path = dir.file("split.json");
        inputs.test_table_path = dir.file("meta.jsonl");
        inputs.systems = {kSystemRef};
        inputs.ref_bundle_dir = dir.file("missing");
        CHECK_THROWS_AS(stage_evaluate(inputs), StaleArtifact);
    }
}

TEST_CASE("recommend and evaluate agree on the same refs") {
    TempDir dir("parsrec_consistency_test");
    RunManifest manifest = RunManifest::defaults(13);
    manifest.synth.n_docs = 50;
    manifest.synth.refs_per_doc = 5;
    manifest.vocab_size = 60;

    stage_synth(manifest, dir.file("corpus.jsonl"));
    stage_split(dir.file("corpus.jsonl"), manifest.fractions, manifest.seed, dir.file("split.json"));
    stage_run_parsers(dir.file("corpus.jsonl"), dir.file("split.json"), Split::Meta,
                      builtin_registry(), "", dir.file("meta.jsonl"));
    stage_run_parsers(dir.file("corpus.jsonl"), dir.file("split.json"), Split::Test,
                      builtin_registry(), "", dir.file("test.jsonl"));
    TrainParams train;
    train.vocab_size = manifest.vocab_size;
    train.seed = manifest.seed;
    stage_train(dir.file("corpus.jsonl"), dir.file("split.json"), dir.file("meta.jsonl"), "ref",
                train, dir.file("ref_bundle"));

    // the evaluation path scores the ref variant over the test table
    EvaluateInputs inputs;
    inputs.corpus_path = dir.file("corpus.jsonl");
    inputs.split_path = dir.file("split.json");
    inputs.test_table_path = dir.file("test.jsonl");
    inputs.ref_bundle_dir = dir.file("ref_bundle");
    inputs.systems = {kSystemRef};
    const auto summary = stage_evaluate(inputs);

    // the serving path parses the same refs live, truth hidden
    const auto corpus = read_corpus_jsonl(dir.file("corpus.jsonl"));
    const auto split = read_split_file(dir.file("split.json"));
    const auto test_refs = records_in_split(corpus, split, Split::Test);
    Corpus unlabeled;
    for (const auto& r : test_refs) unlabeled.records.push_back({r.ref_id, r.doc_id, r.raw, {}});
    write_corpus_jsonl(unlabeled, dir.file("unlabeled.jsonl"));

    stage_recommend(dir.file("ref_bundle"), "ref", dir.file("unlabeled.jsonl"),
                    builtin_registry(), false, dir.file("served.jsonl"));

    // parse the served JSONL and score it against the hidden truth
    std::ifstream served(dir.file("served.jsonl"));
    std::map<std::string, ParsedReference> outputs;
    std::string line;
    std::size_t lines = 0;
    while (std::getline(served, line)) {
        if (line.empty()) continue;
        ++lines;
        const auto j = nlohmann::ordered_json::parse(line);
        ParsedReference fields;
        for (const auto& fj : j.at("fields"))
            fields.add(fj.value("type", ""), fj.value("value", ""));
        outputs[j.value("ref_id", "")] = std::move(fields);
    }
    CHECK(lines == test_refs.size());

    const auto report =
        evaluate_system(kSystemRef, outputs, test_refs, MetadataTypeSet::default_set());
    CHECK(report.micro_f1 == doctest::Approx(summary.report_for(kSystemRef).micro_f1).epsilon(0));
    CHECK(report.totals.tp == summary.report_for(kSystemRef).totals.tp);
    CHECK(report.totals.fp == summary.report_for(kSystemRef).totals.fp);
}
