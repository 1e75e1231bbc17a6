// Acceptance suite: runs the default synthetic experiment end to end plus
// the oracle and property checks, printing one PASS/FAIL line per
// criterion. Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "parsrec/corpus.hpp"
#include "parsrec/evaluate.hpp"
#include "parsrec/extraction.hpp"
#include "parsrec/hash.hpp"
#include "parsrec/linear_model.hpp"
#include "parsrec/logistic_model.hpp"
#include "parsrec/pipeline.hpp"
#include "parsrec/random_forest.hpp"
#include "parsrec/recommend.hpp"
#include "parsrec/rng.hpp"
#include "support/oracles.hpp"

using namespace parsrec;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!pass) ++g_failures;
}

struct RunArtifacts {
    fs::path dir;
    EvaluationSummary summary;
    double seconds = 0.0;
};

// The full pipeline through the same stage functions the CLI wraps.
RunArtifacts run_pipeline(const RunManifest& manifest, const std::string& name,
                          const std::vector<std::string>& systems) {
    RunArtifacts artifacts;
    artifacts.dir = fs::temp_directory_path() / name;
    fs::remove_all(artifacts.dir);
    fs::create_directories(artifacts.dir);
    const auto file = [&](const std::string& f) { return (artifacts.dir / f).string(); };

    const auto start = std::chrono::steady_clock::now();
    stage_synth(manifest, file("corpus.jsonl"));
    stage_split(file("corpus.jsonl"), manifest.fractions, manifest.seed, file("split.json"));
    const auto registry = registry_from_builtin_ids(manifest.registry_ids);
    stage_run_parsers(file("corpus.jsonl"), file("split.json"), Split::Meta, registry, "",
                      file("meta.jsonl"));
    stage_run_parsers(file("corpus.jsonl"), file("split.json"), Split::Test, registry, "",
                      file("test.jsonl"));
    TrainParams train;
    train.vocab_size = manifest.vocab_size;
    train.forest = manifest.forest;
    train.linear_l2 = manifest.linear_l2;
    train.logistic = manifest.logistic;
    train.seed = manifest.seed;
    train.voting_threshold = manifest.voting_threshold;
    stage_train(file("corpus.jsonl"), file("split.json"), file("meta.jsonl"), "ref", train,
                file("ref_bundle"));
    stage_train(file("corpus.jsonl"), file("split.json"), file("meta.jsonl"), "field", train,
                file("field_bundle"));
    stage_train(file("corpus.jsonl"), file("split.json"), file("meta.jsonl"), "baselines", train,
                file("baselines"));

    EvaluateInputs inputs;
    inputs.corpus_path = file("corpus.jsonl");
    inputs.split_path = file("split.json");
    inputs.test_table_path = file("test.jsonl");
    inputs.ref_bundle_dir = file("ref_bundle");
    inputs.field_bundle_dir = file("field_bundle");
    inputs.baselines_path = file("baselines/baselines.json");
    inputs.systems = systems;
    artifacts.summary = stage_evaluate(inputs);
    {
        std::ofstream out(file("summary.json"), std::ios::binary);
        out << summary_to_json(artifacts.summary) << "\n";
        std::ofstream report_out(file("report.txt"), std::ios::binary);
        report_out << render_report_text(artifacts.summary);
    }
    artifacts.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return artifacts;
}

const std::vector<std::string> kAllSystems = {kSystemSingleBest, kSystemHybrid, kSystemVoting,
                                              kSystemRef, kSystemField};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

const PairwiseTTest* find_ttest(const EvaluationSummary& summary, const std::string& a,
                                const std::string& b) {
    for (const auto& t : summary.ttests)
        if ((t.system_a == a && t.system_b == b) || (t.system_a == b && t.system_b == a)) return &t;
    return nullptr;
}

}  // namespace

// criteria 1-3 share the default experiment artifacts
static void criteria_1_to_3(const RunArtifacts& artifacts) {
    const auto& summary = artifacts.summary;
    const double f_field = summary.report_for(kSystemField).micro_f1;
    const double f_ref = summary.report_for(kSystemRef).micro_f1;
    const double f_single = summary.report_for(kSystemSingleBest).micro_f1;
    const double f_voting = summary.report_for(kSystemVoting).micro_f1;
    const double f_hybrid = summary.report_for(kSystemHybrid).micro_f1;

    const bool order_ok = f_field >= f_ref && f_field >= f_single + 0.01 && f_field >= f_voting &&
                          f_field >= f_hybrid;
    const bool time_ok = artifacts.seconds <= 600.0;
    report(1, order_ok && time_ok,
           "relative ordering: Field " + fmt(f_field) + " vs Ref " + fmt(f_ref) + ", SingleBest " +
               fmt(f_single) + ", Voting " + fmt(f_voting) + ", Hybrid " + fmt(f_hybrid) +
               "; runtime " + fmt(artifacts.seconds) + "s");

    const auto* field_vs_single = find_ttest(summary, kSystemField, kSystemSingleBest);
    const bool ref_beats_single = f_ref >= f_single;
    const bool p_ok =
        field_vs_single != nullptr && !field_vs_single->result.no_difference &&
        field_vs_single->result.p < 0.05;
    report(2, ref_beats_single && p_ok,
           "Ref " + fmt(f_ref) + " >= SingleBest " + fmt(f_single) + "; Field vs SingleBest p = " +
               (field_vs_single ? std::to_string(field_vs_single->result.p) : "n/a"));

    const auto& ref_dist = summary.report_for(kSystemRef).choice_distribution;
    const auto& field_dist = summary.report_for(kSystemField).choice_distribution;
    std::string top_parser;
    double top_share = -1.0;
    for (const auto& [parser_id, share] : ref_dist) {
        if (share > top_share) {
            top_share = share;
            top_parser = parser_id;
        }
    }
    const double field_share = field_dist.at(top_parser);
    report(3, top_share > field_share,
           "choice skew: " + top_parser + " has share " + fmt(top_share) + " under Ref vs " +
               fmt(field_share) + " under Field");
}

static void criterion_4_oracle_upper_bound() {
    bool all_ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RunManifest manifest = RunManifest::defaults(seed);
        manifest.synth.n_docs = 150;
        manifest.synth.refs_per_doc = 8;
        manifest.vocab_size = 80;
        const auto artifacts =
            run_pipeline(manifest, "parsrec_accept_seed" + std::to_string(seed), kAllSystems);

        // rebuild the test table and score the perfect-information harness
        const auto corpus = read_corpus_jsonl((artifacts.dir / "corpus.jsonl").string());
        const auto split = read_split_file((artifacts.dir / "split.json").string());
        const auto test_refs = records_in_split(corpus, split, Split::Test);
        const auto table = read_extraction_table((artifacts.dir / "test.jsonl").string());
        const auto types = MetadataTypeSet::default_set();
        const auto oracle_outputs = oracle::perfect_field_outputs(table, test_refs, types);
        const double oracle_f1 =
            evaluate_system("oracle", oracle_outputs, test_refs, types).micro_f1;

        for (const auto& r : artifacts.summary.systems) {
            if (oracle_f1 < r.micro_f1) {
                all_ok = false;
                detail += " seed " + std::to_string(seed) + ": oracle " + fmt(oracle_f1) + " < " +
                          r.system + " " + fmt(r.micro_f1) + ";";
            }
        }
        fs::remove_all(artifacts.dir);
    }
    report(4, all_ok, all_ok ? "perfect-information harness dominates on seeds 1..5"
                             : "oracle upper bound violated:" + detail);
}

static void criterion_5_learner_oracles() {
    std::mt19937_64 gen(2024);

    // ridge vs independently coded normal equations, 20 random problems
    bool ridge_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 30 + uniform_below(gen, 40);
        const std::size_t d = 2 + uniform_below(gen, 6);
        std::vector<std::vector<double>> x(n, std::vector<double>(d));
        std::vector<double> y(n);
        for (auto& row : x)
            for (auto& v : row) v = 2.0 * uniform_real(gen) - 1.0;
        for (auto& v : y) v = uniform_real(gen);
        const double l2 = 0.01 + uniform_real(gen);
        const auto model = fit_linear(x, y, l2);
        const auto expected = oracle::ridge_normal_equations(x, y, l2);
        for (std::size_t j = 0; j < d; ++j)
            if (std::fabs(model.weights[j] - expected[j]) > 1e-8) ridge_ok = false;
        if (std::fabs(model.intercept - expected[d]) > 1e-8) ridge_ok = false;
    }

    // logistic gradient at convergence vs central finite differences
    bool logistic_ok = true;
    {
        const std::size_t n = 80, d = 4;
        std::vector<std::vector<double>> x(n, std::vector<double>(d));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : x[i]) v = 2.0 * uniform_real(gen) - 1.0;
            y[i] = (x[i][0] - 0.4 * x[i][3] + 0.1 * uniform_real(gen)) > 0.0 ? 1 : 0;
        }
        TrainConfig config;
        config.l2 = 0.7;
        const auto model = fit_logistic(x, y, config);
        const auto loss_fn = [&](const std::vector<double>& w, double b) {
            return logistic_loss(x, y, w, b, config.l2);
        };
        const auto analytic =
            logistic_gradient(x, y, model.weights, model.intercept, config.l2);
        const auto fd =
            oracle::finite_difference_gradient(loss_fn, model.weights, model.intercept);
        double num = 0.0, na = 0.0, nf = 0.0;
        for (std::size_t j = 0; j < analytic.size(); ++j) {
            num += (analytic[j] - fd[j]) * (analytic[j] - fd[j]);
            na += analytic[j] * analytic[j];
            nf += fd[j] * fd[j];
        }
        const double rel =
            std::sqrt(num) / std::max({1.0, std::sqrt(na), std::sqrt(nf)});
        logistic_ok = model.converged && rel < 1e-4;
    }

    // planted informative feature ranks first in >= 19 of 20 seeded runs
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 local(seed * 7919 + 3);
        const std::size_t n = 250, d = 51, planted = 17;
        std::vector<std::vector<double>> x(n, std::vector<double>(d));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : x[i]) v = uniform_real(local);
            y[i] = x[i][planted] > 0.5 ? 1 : 0;
        }
        ForestParams params;
        params.n_trees = 50;
        params.min_samples_leaf = 2;
        params.seed = seed;
        const auto imp = feature_importances(fit_random_forest(x, y, params));
        if (static_cast<std::size_t>(std::max_element(imp.begin(), imp.end()) - imp.begin()) ==
            planted)
            ++hits;
    }
    const bool forest_ok = hits >= 19;

    report(5, ridge_ok && logistic_ok && forest_ok,
           std::string("learner oracles: ridge ") + (ridge_ok ? "ok" : "FAILED") +
               ", logistic gradient " + (logistic_ok ? "ok" : "FAILED") + ", forest planted-first " +
               std::to_string(hits) + "/20");
}

static void criterion_6_evaluation_oracles() {
    // match_fields vs brute-force bipartite matching on 1000 random instances
    std::mt19937_64 gen(99);
    const std::vector<std::string> types = {"author", "year", "volume", "page"};
    const std::vector<std::string> values = {"x", "y", "z"};
    bool match_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        ParsedReference a, b;
        const auto fill = [&](ParsedReference& ref) {
            const auto n = uniform_below(gen, 7);
            for (std::size_t i = 0; i < n; ++i)
                ref.add(types[uniform_below(gen, types.size())],
                        values[uniform_below(gen, values.size())]);
        };
        fill(a);
        fill(b);
        if (match_fields(a, b).tp != oracle::bipartite_tp(a, b)) match_ok = false;
    }

    const auto s = score_reference({2, 1, 1});
    const bool score_ok = std::fabs(s.precision - 2.0 / 3.0) < 1e-12 &&
                          std::fabs(s.recall - 2.0 / 3.0) < 1e-12 &&
                          std::fabs(s.f1 - 2.0 / 3.0) < 1e-12;

    const auto t = paired_ttest({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0});
    const double p_oracle = oracle::t_two_sided_p(t.t, t.df);
    const bool t_ok = std::fabs(t.t - 4.242640687) < 1e-6 && std::fabs(t.p - p_oracle) < 1e-6;

    report(6, match_ok && score_ok && t_ok,
           std::string("evaluation oracles: matching ") + (match_ok ? "ok" : "FAILED") +
               ", score 2/1/1 " + (score_ok ? "ok" : "FAILED") + ", t-test t=" + fmt(t.t) +
               " p=" + std::to_string(t.p) + " (oracle " + std::to_string(p_oracle) + ")");
}

static void criterion_7_determinism() {
    RunManifest manifest = RunManifest::defaults(31);
    manifest.synth.n_docs = 200;
    manifest.synth.refs_per_doc = 8;
    manifest.vocab_size = 100;

    const auto a = run_pipeline(manifest, "parsrec_accept_det_a", kAllSystems);
    const auto b = run_pipeline(manifest, "parsrec_accept_det_b", kAllSystems);

    bool all_ok = true;
    std::string mismatch;
    const std::vector<std::string> files = {
        "corpus.jsonl",       "split.json",          "meta.jsonl",
        "test.jsonl",         "summary.json",        "report.txt",
        "ref_bundle/manifest.json", "ref_bundle/vocab.json",
        "field_bundle/manifest.json", "field_bundle/vocab.json",
        "baselines/baselines.json"};
    std::vector<std::string> all_files = files;
    for (const auto& entry : fs::recursive_directory_iterator(a.dir / "ref_bundle" / "models"))
        all_files.push_back("ref_bundle/models/" + entry.path().filename().string());
    for (const auto& entry : fs::recursive_directory_iterator(a.dir / "field_bundle" / "models"))
        all_files.push_back("field_bundle/models/" + entry.path().filename().string());

    for (const auto& f : all_files) {
        const auto fa = a.dir / f;
        const auto fb = b.dir / f;
        if (!fs::exists(fa) || !fs::exists(fb) ||
            hash_file(fa.string()) != hash_file(fb.string())) {
            all_ok = false;
            mismatch += " " + f;
        }
    }
    fs::remove_all(a.dir);
    fs::remove_all(b.dir);
    report(7, all_ok,
           all_ok ? "two runs from one manifest are byte-identical (corpus, split, tables, "
                    "models, reports)"
                  : "byte mismatch in:" + mismatch);
}

static void criterion_8_collapse_and_totality(const RunArtifacts& default_run) {
    // collapse: a single-parser registry makes all five systems identical
    // on 500 random refs
    SynthParams params;
    params.styles = default_styles();
    params.n_docs = 100;
    params.refs_per_doc = 5;
    params.seed = 77;
    const auto corpus = synth(params);
    const auto& refs = corpus.records;
    const auto types = MetadataTypeSet::default_set();

    ParserRegistry registry = registry_from_builtin_ids({"apa"});
    ParserRunner runner(registry);
    const auto table = run_all_parsers(runner, refs);
    const auto vocab = NgramVocabulary{};
    const auto ref_rec = train_ref_recommender(table, refs, vocab, 1e-3);
    const auto field_rec = train_field_recommender(table, refs, vocab, types);
    const auto policy = fit_baselines(table, refs, types, 1);

    const auto single = outputs_single_parser(table, policy.single_best);
    const auto hybrid = outputs_hybrid(table, policy, types);
    const auto voting = outputs_voting(table, 1);
    const auto by_ref = outputs_ref_variant(ref_rec, refs, table);
    const auto by_field = outputs_field_variant(field_rec, refs, table);
    bool collapse_ok = refs.size() == 500;
    for (const auto& r : refs) {
        for (const auto* other : {&hybrid, &voting, &by_ref, &by_field}) {
            const auto m = match_fields(other->at(r.ref_id), single.at(r.ref_id));
            if (m.fp != 0 || m.fn != 0) collapse_ok = false;
        }
    }

    // totality and no-mixing over the default run's test refs
    const auto full_corpus = read_corpus_jsonl((default_run.dir / "corpus.jsonl").string());
    const auto split = read_split_file((default_run.dir / "split.json").string());
    const auto test_refs = records_in_split(full_corpus, split, Split::Test);
    const auto test_table = read_extraction_table((default_run.dir / "test.jsonl").string());
    const auto full_ref_rec = load_ref_recommender((default_run.dir / "ref_bundle").string());
    const auto full_field_rec =
        load_field_recommender((default_run.dir / "field_bundle").string());

    bool totality_ok = true;
    bool no_mix_ok = true;
    const auto all_ids = test_table.parser_ids();
    for (const auto& r : test_refs) {
        const auto ranking = recommend_ref(full_ref_rec, r.raw);
        std::set<std::string> seen;
        for (const auto& [id, _] : ranking.entries) seen.insert(id);
        if (seen.size() != all_ids.size() || ranking.entries.size() != all_ids.size())
            totality_ok = false;

        const auto rankings = recommend_field(full_field_rec, r.raw);
        if (rankings.size() != types.size()) totality_ok = false;
        std::map<std::string, std::string> chosen;
        const auto out = assemble_field(rankings, table_source(test_table, r.ref_id), {}, &chosen);
        for (const auto& [type, ranking_t] : rankings) {
            if (ranking_t.entries.size() != all_ids.size()) totality_ok = false;
            // output restricted to this type must equal the chosen parser's
            // fields of this type, i.e. one parser per type, never a blend
            const auto& cell = test_table.cell(chosen.at(type), r.ref_id);
            ParsedReference expected, got;
            if (!cell.failed)
                for (const auto& f : cell.fields.fields)
                    if (f.type == type) expected.fields.push_back(f);
            for (const auto& f : out.fields)
                if (f.type == type) got.fields.push_back(f);
            const auto m = match_fields(got, expected);
            if (m.fp != 0 || m.fn != 0) no_mix_ok = false;
        }
    }

    report(8, collapse_ok && totality_ok && no_mix_ok,
           std::string("collapse on 500 refs ") + (collapse_ok ? "ok" : "FAILED") +
               ", ranking totality " + (totality_ok ? "ok" : "FAILED") +
               ", field assembly never mixes parsers within a type " +
               (no_mix_ok ? "ok" : "FAILED"));
}

int main() {
    std::printf("acceptance: default experiment (5 styles, 15000 refs, seed 1)\n");
    const RunManifest manifest = RunManifest::defaults(1);
    const auto default_run = run_pipeline(manifest, "parsrec_accept_default", kAllSystems);

    criteria_1_to_3(default_run);
    criterion_4_oracle_upper_bound();
    criterion_5_learner_oracles();
    criterion_6_evaluation_oracles();
    criterion_7_determinism();
    criterion_8_collapse_and_totality(default_run);

    fs::remove_all(default_run.dir);
    if (g_failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return g_failures;
}
