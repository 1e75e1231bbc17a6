#include "parsrec/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parsrec/corpus.hpp"
#include "parsrec/errors.hpp"
#include "parsrec/extraction.hpp"
#include "parsrec/hash.hpp"
#include "parsrec/version.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

RunManifest RunManifest::defaults(std::uint64_t seed) {
    RunManifest m;
    m.seed = seed;
    m.synth.styles = default_styles();
    m.synth.n_docs = 1000;
    m.synth.refs_per_doc = 15;
    m.synth.seed = seed;
    m.forest.seed = seed;
    for (const auto& d : builtin_registry().parsers) m.registry_ids.push_back(d.parser_id);
    return m;
}

std::string manifest_to_json(const RunManifest& m) {
    ordered_json j;
    j["kind"] = "run_manifest";
    j["version"] = kVersion;
    j["seed"] = m.seed;
    ordered_json styles = ordered_json::array();
    for (const auto& s : m.synth.styles) {
        styles.push_back({{"name", s.name},
                          {"weight", s.weight},
                          {"punctuation_jitter", s.noise.punctuation_jitter},
                          {"field_dropout", s.noise.field_dropout},
                          {"style_mix", s.noise.style_mix}});
    }
    j["synth"] = {{"styles", std::move(styles)},
                  {"n_docs", m.synth.n_docs},
                  {"refs_per_doc", m.synth.refs_per_doc},
                  {"seed", m.synth.seed}};
    j["fractions"] = {{"train", m.fractions.train},
                      {"meta", m.fractions.meta},
                      {"test", m.fractions.test}};
    j["vocab_size"] = m.vocab_size;
    j["forest"] = {{"n_trees", m.forest.n_trees},
                   {"max_depth", m.forest.max_depth},
                   {"min_samples_leaf", m.forest.min_samples_leaf},
                   {"features_per_split_fraction", m.forest.features_per_split_fraction},
                   {"bootstrap", m.forest.bootstrap}};
    j["linear_l2"] = m.linear_l2;
    j["logistic"] = {{"l2", m.logistic.l2},
                     {"max_iterations", m.logistic.max_iterations},
                     {"tolerance", m.logistic.tolerance}};
    j["registry"] = m.registry_ids;
    j["voting_threshold"] = m.voting_threshold;
    j["fallback_on_failure"] = m.fallback_on_failure;
    return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    if (j.value("kind", "") != "run_manifest") throw InvalidInput("not a run manifest");
    RunManifest m;
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("synth")) {
        const auto& sj = j["synth"];
        m.synth.styles.clear();
        for (const auto& st : sj.value("styles", ordered_json::array())) {
            SynthStyleSpec spec;
            spec.name = st.value("name", "");
            spec.weight = st.value("weight", 1.0);
            spec.noise.punctuation_jitter = st.value("punctuation_jitter", 0.15);
            spec.noise.field_dropout = st.value("field_dropout", 0.15);
            spec.noise.style_mix = st.value("style_mix", 0.10);
            m.synth.styles.push_back(std::move(spec));
        }
        m.synth.n_docs = sj.value("n_docs", std::size_t{1000});
        m.synth.refs_per_doc = sj.value("refs_per_doc", std::size_t{15});
        m.synth.seed = sj.value("seed", m.seed);
    }
    if (j.contains("fractions")) {
        m.fractions.train = j["fractions"].value("train", 0.4);
        m.fractions.meta = j["fractions"].value("meta", 0.3);
        m.fractions.test = j["fractions"].value("test", 0.3);
    }
    m.vocab_size = j.value("vocab_size", kDefaultVocabularySize);
    if (j.contains("forest")) {
        m.forest.n_trees = j["forest"].value("n_trees", 100);
        m.forest.max_depth = j["forest"].value("max_depth", 12);
        m.forest.min_samples_leaf = j["forest"].value("min_samples_leaf", 5);
        m.forest.features_per_split_fraction =
            j["forest"].value("features_per_split_fraction", 1.0);
        m.forest.bootstrap = j["forest"].value("bootstrap", true);
    }
    m.forest.seed = m.seed;
    m.linear_l2 = j.value("linear_l2", 1e-3);
    if (j.contains("logistic")) {
        m.logistic.l2 = j["logistic"].value("l2", 1.0);
        m.logistic.max_iterations = j["logistic"].value("max_iterations", 100);
        m.logistic.tolerance = j["logistic"].value("tolerance", 1e-6);
    }
    if (j.contains("registry")) m.registry_ids = j["registry"].get<std::vector<std::string>>();
    m.voting_threshold = j.value("voting_threshold", 3);
    m.fallback_on_failure = j.value("fallback_on_failure", false);
    return m;
}

const CorpusReport& EvaluationSummary::report_for(const std::string& system_id) const {
    for (const auto& r : systems)
        if (r.system == system_id) return r;
    throw InvalidInput("no report for system " + system_id);
}

std::string summary_to_json(const EvaluationSummary& summary) {
    ordered_json j;
    j["kind"] = "evaluation_summary";
    j["version"] = kVersion;
    j["corpus_hash"] = summary.corpus_hash;
    j["table_refs_hash"] = summary.table_refs_hash;
    j["cross_split_duplicates"] = summary.cross_split_duplicates;
    ordered_json systems = ordered_json::array();
    for (const auto& r : summary.systems) systems.push_back(ordered_json::parse(report_to_json(r)));
    j["systems"] = std::move(systems);
    ordered_json ttests = ordered_json::array();
    for (const auto& t : summary.ttests) {
        ttests.push_back({{"system_a", t.system_a},
                          {"system_b", t.system_b},
                          {"t", t.result.t},
                          {"df", t.result.df},
                          {"p", t.result.p},
                          {"n", t.result.n},
                          {"no_difference", t.result.no_difference}});
    }
    j["ttests"] = std::move(ttests);
    return j.dump(2);
}

EvaluationSummary summary_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    if (j.value("kind", "") != "evaluation_summary")
        throw InvalidInput("not an evaluation summary");
    EvaluationSummary s;
    s.corpus_hash = j.value("corpus_hash", "");
    s.table_refs_hash = j.value("table_refs_hash", "");
    s.cross_split_duplicates = j.value("cross_split_duplicates", std::size_t{0});
    for (const auto& rj : j.value("systems", ordered_json::array()))
        s.systems.push_back(report_from_json(rj.dump()));
    for (const auto& tj : j.value("ttests", ordered_json::array())) {
        PairwiseTTest t;
        t.system_a = tj.value("system_a", "");
        t.system_b = tj.value("system_b", "");
        t.result.t = tj.value("t", 0.0);
        t.result.df = tj.value("df", 0.0);
        t.result.p = tj.value("p", 1.0);
        t.result.n = tj.value("n", std::size_t{0});
        t.result.no_difference = tj.value("no_difference", false);
        s.ttests.push_back(std::move(t));
    }
    return s;
}

std::string render_report_text(const EvaluationSummary& summary) {
    std::ostringstream out;
    out.setf(std::ios::fixed);

    out << "System comparison (" << summary.systems.front().n_refs << " refs, "
        << summary.systems.front().n_docs << " docs";
    if (summary.cross_split_duplicates > 0)
        out << "; " << summary.cross_split_duplicates
            << " reference strings shared across splits";
    out << ")\n\n";

    out << std::left << std::setw(16) << "system" << std::right << std::setw(11) << "precision"
        << std::setw(9) << "recall" << std::setw(9) << "F1" << std::setw(10) << "macroF1"
        << std::setw(10) << "fp_rate" << std::setw(10) << "fn_rate" << "\n";
    out << std::string(75, '-') << "\n";
    out.precision(4);
    for (const auto& r : summary.systems) {
        out << std::left << std::setw(16) << system_display_name(r.system) << std::right
            << std::setw(11) << r.micro_precision << std::setw(9) << r.micro_recall << std::setw(9)
            << r.micro_f1 << std::setw(10) << r.macro_f1 << std::setw(10) << r.fp_rate
            << std::setw(10) << r.fn_rate << "\n";
    }

    bool any_types = false;
    for (const auto& r : summary.systems) any_types |= !r.per_type_f1.empty();
    if (any_types) {
        out << "\nPer-type F1\n";
        const auto& first = summary.systems.front().per_type_f1;
        out << std::left << std::setw(16) << "system";
        for (const auto& [type, _] : first) out << std::right << std::setw(9) << type;
        out << "\n" << std::string(16 + 9 * first.size(), '-') << "\n";
        for (const auto& r : summary.systems) {
            out << std::left << std::setw(16) << system_display_name(r.system) << std::right;
            for (const auto& [_, f1] : r.per_type_f1) out << std::setw(9) << f1;
            out << "\n";
        }
    }

    if (!summary.ttests.empty()) {
        out << "\nPaired t-tests over per-document mean F1\n";
        for (const auto& t : summary.ttests) {
            out << "  " << system_display_name(t.system_a) << " vs "
                << system_display_name(t.system_b) << ": ";
            if (t.result.no_difference) {
                out << "no difference\n";
                continue;
            }
            out.precision(4);
            out << "t = " << t.result.t << ", df = " << t.result.df << ", p = ";
            out.precision(6);
            out << t.result.p << "\n";
        }
    }

    bool any_choices = false;
    for (const auto& r : summary.systems) any_choices |= !r.choice_distribution.empty();
    if (any_choices) {
        out << "\nParser choice distribution\n";
        for (const auto& r : summary.systems) {
            if (r.choice_distribution.empty()) continue;
            out << "  " << system_display_name(r.system) << ":";
            out.precision(3);
            for (const auto& [parser_id, share] : r.choice_distribution)
                out << "  " << parser_id << " " << share;
            out << "\n";
        }
    }
    return out.str();
}

// ---- stages ----

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open file: " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write file: " + path);
    out << text;
}

Corpus load_corpus_checked(const std::string& corpus_path, const std::string& split_path,
                           SplitAssignment& split) {
    const Corpus corpus = read_corpus_jsonl(corpus_path);
    std::string recorded_hash;
    split = read_split_file(split_path, &recorded_hash);
    const std::string actual = hash_file(corpus_path);
    if (!recorded_hash.empty() && recorded_hash != actual)
        throw StaleArtifact("split file " + split_path + " was computed from a different corpus (" +
                            recorded_hash + " != " + actual + ")");
    return corpus;
}

}  // namespace

std::string stage_synth(const RunManifest& manifest, const std::string& corpus_path) {
    const Corpus corpus = synth(manifest.synth);
    write_corpus_jsonl(corpus, corpus_path);
    return hash_file(corpus_path);
}

void stage_split(const std::string& corpus_path, const SplitFractions& fractions,
                 std::uint64_t seed, const std::string& split_path) {
    const Corpus corpus = read_corpus_jsonl(corpus_path);
    const auto violations = validate_corpus(corpus, MetadataTypeSet::default_set());
    for (const auto& v : violations)
        if (v.rule == "duplicate ref_id" || v.rule.find("empty") != std::string::npos)
            throw InvalidInput("corpus invalid (" + v.ref_id + ": " + v.rule + ")");
    const SplitAssignment split = split_corpus(corpus, fractions, seed);
    write_split_file(split, hash_file(corpus_path), split_path);
}

void stage_run_parsers(const std::string& corpus_path, const std::string& split_path, Split which,
                       const ParserRegistry& registry, const std::string& cache_dir,
                       const std::string& table_path) {
    SplitAssignment split;
    const Corpus corpus = load_corpus_checked(corpus_path, split_path, split);
    const auto refs = records_in_split(corpus, split, which);
    if (refs.empty()) throw InvalidInput(std::string("split ") + split_name(which) + " is empty");
    ParserRunner runner(registry);
    ExtractionTable table = run_all_parsers(runner, refs, cache_dir);
    table.split = split_name(which);
    write_extraction_table(table, table_path);
}

void stage_train(const std::string& corpus_path, const std::string& split_path,
                 const std::string& meta_table_path, const std::string& variant,
                 const TrainParams& params, const std::string& out_dir) {
    SplitAssignment split;
    const Corpus corpus = load_corpus_checked(corpus_path, split_path, split);
    const auto meta_refs = records_in_split(corpus, split, Split::Meta);
    for (const auto& r : meta_refs)
        if (!r.truth) throw InvalidInput("meta-split ref without ground truth: " + r.ref_id);

    const ExtractionTable table = read_extraction_table(meta_table_path);
    if (table.split != "meta")
        throw StaleArtifact("extraction table " + meta_table_path + " covers split '" +
                            table.split + "', expected 'meta'");
    if (table.refs_hash != hash_refs(meta_refs))
        throw StaleArtifact("extraction table " + meta_table_path +
                            " does not match the corpus meta split");

    fs::create_directories(out_dir);

    if (variant == "baselines") {
        const BaselinePolicies policy = fit_baselines(table, meta_refs,
                                                      MetadataTypeSet::default_set(),
                                                      params.voting_threshold);
        save_baselines(policy, (fs::path(out_dir) / "baselines.json").string(), table.refs_hash);
        return;
    }

    // Shared vocabulary: selected once on the meta set, reused by both
    // recommender variants.
    std::vector<std::string> raws;
    raws.reserve(meta_refs.size());
    for (const auto& r : meta_refs) raws.push_back(r.raw);
    const auto f1_table = per_parser_f1_table(table, meta_refs);
    ForestParams forest = params.forest;
    forest.seed = params.seed;
    const NgramVocabulary vocab =
        build_vocabulary(raws, f1_table, params.vocab_size, forest, params.seed);

    if (variant == "ref") {
        const RefRecommender rec = train_ref_recommender(table, meta_refs, vocab, params.linear_l2);
        save_ref_recommender(rec, out_dir, table.refs_hash);
    } else if (variant == "field") {
        const FieldRecommender rec = train_field_recommender(
            table, meta_refs, vocab, MetadataTypeSet::default_set(), params.logistic);
        save_field_recommender(rec, out_dir, table.refs_hash);
    } else {
        throw InvalidInput("unknown train variant: " + variant +
                           " (expected ref, field or baselines)");
    }
}

EvaluationSummary stage_evaluate(const EvaluateInputs& inputs) {
    SplitAssignment split;
    const Corpus corpus = load_corpus_checked(inputs.corpus_path, inputs.split_path, split);
    const auto test_refs = records_in_split(corpus, split, Split::Test);
    for (const auto& r : test_refs)
        if (!r.truth) throw InvalidInput("test-split ref without ground truth: " + r.ref_id);

    const ExtractionTable table = read_extraction_table(inputs.test_table_path);
    if (table.split != "test")
        throw StaleArtifact("extraction table " + inputs.test_table_path + " covers split '" +
                            table.split + "', expected 'test'");
    if (table.refs_hash != hash_refs(test_refs))
        throw StaleArtifact("extraction table " + inputs.test_table_path +
                            " does not match the corpus test split");

    const auto meta_refs = records_in_split(corpus, split, Split::Meta);
    const std::string meta_hash = hash_refs(meta_refs);
    const MetadataTypeSet types = MetadataTypeSet::default_set();
    const AssembleOptions options{inputs.fallback_on_failure};

    EvaluationSummary summary;
    summary.corpus_hash = hash_file(inputs.corpus_path);
    summary.table_refs_hash = table.refs_hash;
    summary.cross_split_duplicates = count_cross_split_duplicates(corpus, split);

    std::optional<BaselinePolicies> baselines;
    const auto need_baselines = [&]() -> const BaselinePolicies& {
        if (!baselines) {
            if (inputs.baselines_path.empty())
                throw InvalidInput("baseline systems requested without --baselines file");
            std::string train_hash;
            baselines = load_baselines(inputs.baselines_path, &train_hash);
            if (!train_hash.empty() && train_hash != meta_hash)
                throw StaleArtifact("baselines file " + inputs.baselines_path +
                                    " was trained on a different meta split");
        }
        return *baselines;
    };

    for (const auto& system : inputs.systems) {
        std::map<std::string, ParsedReference> outputs;
        std::vector<std::string> choices;
        if (system == kSystemSingleBest) {
            outputs = outputs_single_parser(table, need_baselines().single_best);
        } else if (system == kSystemHybrid) {
            outputs = outputs_hybrid(table, need_baselines(), types);
        } else if (system == kSystemVoting) {
            outputs = outputs_voting(table, need_baselines().voting_threshold);
        } else if (system == kSystemRef) {
            if (inputs.ref_bundle_dir.empty())
                throw InvalidInput("system parsrec_ref requested without --ref-bundle");
            const RefRecommender rec = load_ref_recommender(inputs.ref_bundle_dir);
            outputs = outputs_ref_variant(rec, test_refs, table, options, &choices);
        } else if (system == kSystemField) {
            if (inputs.field_bundle_dir.empty())
                throw InvalidInput("system parsrec_field requested without --field-bundle");
            const FieldRecommender rec = load_field_recommender(inputs.field_bundle_dir);
            outputs = outputs_field_variant(rec, test_refs, table, options, &choices);
        } else {
            throw InvalidInput("unknown system: " + system);
        }
        CorpusReport report = evaluate_system(system, outputs, test_refs, types);
        if (!choices.empty())
            report.choice_distribution = choice_distribution(choices, table.parser_ids());
        summary.systems.push_back(std::move(report));
    }

    // Pairwise t-tests between every requested system pair, in request order.
    for (std::size_t i = 0; i < summary.systems.size(); ++i) {
        for (std::size_t k = i + 1; k < summary.systems.size(); ++k) {
            const auto& ra = summary.systems[i];
            const auto& rb = summary.systems[k];
            std::vector<double> a, b;
            for (const auto& [doc, f1] : ra.doc_mean_f1) {
                auto it = rb.doc_mean_f1.find(doc);
                if (it == rb.doc_mean_f1.end())
                    throw InvalidInput("t-test: document sets differ between systems");
                a.push_back(f1);
                b.push_back(it->second);
            }
            PairwiseTTest t;
            t.system_a = ra.system;
            t.system_b = rb.system;
            t.result = paired_ttest(a, b);
            summary.ttests.push_back(std::move(t));
        }
    }
    return summary;
}

void stage_recommend(const std::string& bundle_dir, const std::string& variant,
                     const std::string& input_path, const ParserRegistry& registry,
                     bool fallback_on_failure, const std::string& out_path) {
    const Corpus input = read_corpus_jsonl(input_path);
    ParserRunner runner(registry);
    const AssembleOptions options{fallback_on_failure};

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write output: " + out_path);

    if (variant == "ref") {
        const RefRecommender rec = load_ref_recommender(bundle_dir);
        for (const auto& r : input.records) {
            const Ranking ranking = recommend_ref(rec, r.raw);
            std::string chosen;
            const ParsedReference fields = assemble_ref(
                ranking,
                [&](const std::string& parser_id) { return runner.parse(parser_id, r.raw, r.ref_id); },
                options, &chosen);
            ordered_json j;
            j["ref_id"] = r.ref_id;
            j["parser"] = chosen;
            ordered_json fj = ordered_json::array();
            for (const auto& f : fields.fields)
                fj.push_back(ordered_json{{"type", f.type}, {"value", f.value}});
            j["fields"] = std::move(fj);
            out << j.dump() << "\n";
        }
    } else if (variant == "field") {
        const FieldRecommender rec = load_field_recommender(bundle_dir);
        for (const auto& r : input.records) {
            const auto rankings = recommend_field(rec, r.raw);
            std::map<std::string, std::string> chosen;
            const ParsedReference fields = assemble_field(
                rankings,
                [&](const std::string& parser_id) { return runner.parse(parser_id, r.raw, r.ref_id); },
                options, &chosen);
            ordered_json j;
            j["ref_id"] = r.ref_id;
            j["parsers"] = chosen;
            ordered_json fj = ordered_json::array();
            for (const auto& f : fields.fields)
                fj.push_back(ordered_json{{"type", f.type}, {"value", f.value}});
            j["fields"] = std::move(fj);
            out << j.dump() << "\n";
        }
    } else {
        throw InvalidInput("unknown recommend variant: " + variant);
    }
}

}  // namespace parsrec
