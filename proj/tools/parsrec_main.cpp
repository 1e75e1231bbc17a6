// Command-line pipeline: synthetic corpus generation, splitting, parser
// execution, recommender training, evaluation and reporting.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "parsrec/corpus.hpp"
#include "parsrec/errors.hpp"
#include "parsrec/hash.hpp"
#include "parsrec/pipeline.hpp"
#include "parsrec/version.hpp"

namespace {

using namespace parsrec;

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitStaleArtifact = 3;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

SplitFractions parse_fractions(const std::string& s) {
    const auto parts = split_csv(s);
    if (parts.size() != 3)
        throw InvalidInput("--fractions expects three comma-separated values, e.g. 0.4,0.3,0.3");
    SplitFractions f;
    try {
        f.train = std::stod(parts[0]);
        f.meta = std::stod(parts[1]);
        f.test = std::stod(parts[2]);
    } catch (const std::exception&) {
        throw InvalidInput("--fractions values must be numbers");
    }
    return f;
}

ParserRegistry parse_registry(const std::string& value) {
    if (value.empty()) return builtin_registry();
    if (value.size() > 5 && value.substr(value.size() - 5) == ".json")
        return registry_from_json_file(value);
    return registry_from_builtin_ids(split_csv(value));
}

void require_file(const std::string& path, const std::string& what) {
    if (!std::filesystem::exists(path))
        throw InvalidInput(what + " not found: " + path);
}

RunManifest load_manifest_or_defaults(const std::string& config_path, std::uint64_t seed) {
    if (config_path.empty()) return RunManifest::defaults(seed);
    require_file(config_path, "config file");
    std::ifstream in(config_path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return manifest_from_json(text);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write file: " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meta-learning recommender for bibliographic reference parsers"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::string synth_out, synth_config, synth_manifest_out;
    std::uint64_t synth_seed = 0;
    std::size_t synth_docs = 1000, synth_refs = 15;
    double synth_jitter = 0.15, synth_dropout = 0.15, synth_mix = 0.10;
    synth_cmd->add_option("--out", synth_out, "corpus JSONL path")->required();
    synth_cmd->add_option("--seed", synth_seed, "root seed");
    synth_cmd->add_option("--docs", synth_docs, "number of documents");
    synth_cmd->add_option("--refs-per-doc", synth_refs, "references per document");
    synth_cmd->add_option("--jitter", synth_jitter, "punctuation jitter probability");
    synth_cmd->add_option("--dropout", synth_dropout, "field dropout probability");
    synth_cmd->add_option("--mix", synth_mix, "style mixing probability");
    synth_cmd->add_option("--config", synth_config, "run manifest JSON (flags win)");
    synth_cmd->add_option("--write-manifest", synth_manifest_out,
                          "write the effective run manifest here");

    // ---- split ----
    auto* split_cmd = app.add_subcommand("split", "assign documents to train/meta/test");
    std::string split_corpus_path, split_out, split_fractions = "0.4,0.3,0.3";
    std::uint64_t split_seed = 0;
    split_cmd->add_option("--corpus", split_corpus_path, "corpus JSONL")->required();
    split_cmd->add_option("--fractions", split_fractions, "train,meta,test fractions");
    split_cmd->add_option("--seed", split_seed, "shuffle seed");
    split_cmd->add_option("--out", split_out, "split file path")->required();

    // ---- run-parsers ----
    auto* run_cmd = app.add_subcommand("run-parsers", "apply every parser to one split");
    std::string run_corpus, run_split, run_split_name = "meta", run_registry, run_cache, run_out;
    run_cmd->add_option("--corpus", run_corpus, "corpus JSONL")->required();
    run_cmd->add_option("--split", run_split, "split file")->required();
    run_cmd->add_option("--split-name", run_split_name, "train, meta or test");
    run_cmd->add_option("--registry", run_registry,
                        "comma-separated builtin ids or a registry JSON file");
    run_cmd->add_option("--cache-dir", run_cache, "per-parser result cache directory");
    run_cmd->add_option("--out", run_out, "extraction table path")->required();

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train a recommender or the baselines");
    std::string train_corpus, train_split, train_table, train_variant, train_out, train_config;
    std::uint64_t train_seed = 0;
    std::size_t train_vocab_size = kDefaultVocabularySize;
    double train_linear_l2 = 1e-3, train_logistic_l2 = 1.0;
    int train_voting_threshold = 3;
    train_cmd->add_option("--corpus", train_corpus, "corpus JSONL")->required();
    train_cmd->add_option("--split", train_split, "split file")->required();
    train_cmd->add_option("--table", train_table, "meta-split extraction table")->required();
    train_cmd->add_option("--variant", train_variant, "ref, field or baselines")->required();
    train_cmd->add_option("--vocab-size", train_vocab_size, "n-gram features to select");
    train_cmd->add_option("--seed", train_seed, "selection seed");
    train_cmd->add_option("--linear-l2", train_linear_l2, "ridge strength (ref variant)");
    train_cmd->add_option("--logistic-l2", train_logistic_l2, "L2 strength (field variant)");
    train_cmd->add_option("--voting-threshold", train_voting_threshold, "voting baseline m");
    train_cmd->add_option("--config", train_config, "run manifest JSON (flags win)");
    train_cmd->add_option("--out", train_out, "bundle output directory")->required();

    // ---- evaluate ----
    auto* eval_cmd = app.add_subcommand("evaluate", "score systems on the test split");
    std::string eval_corpus, eval_split, eval_table, eval_systems, eval_ref_bundle,
        eval_field_bundle, eval_baselines, eval_out, eval_report, eval_csv;
    bool eval_fallback = false;
    eval_cmd->add_option("--corpus", eval_corpus, "corpus JSONL")->required();
    eval_cmd->add_option("--split", eval_split, "split file")->required();
    eval_cmd->add_option("--table", eval_table, "test-split extraction table")->required();
    eval_cmd->add_option("--systems", eval_systems,
                         "comma list from single_best,hybrid,voting,parsrec_ref,parsrec_field")
        ->required();
    eval_cmd->add_option("--ref-bundle", eval_ref_bundle, "ref recommender bundle dir");
    eval_cmd->add_option("--field-bundle", eval_field_bundle, "field recommender bundle dir");
    eval_cmd->add_option("--baselines", eval_baselines, "baselines JSON");
    eval_cmd->add_flag("--fallback-on-failure", eval_fallback,
                       "fall back to the next-ranked parser on failure");
    eval_cmd->add_option("--out", eval_out, "evaluation summary JSON")->required();
    eval_cmd->add_option("--report", eval_report, "also render the text report here");
    eval_cmd->add_option("--csv", eval_csv, "per-reference scores CSV");

    // ---- recommend ----
    auto* rec_cmd = app.add_subcommand("recommend", "parse refs with a saved recommender");
    std::string rec_bundle, rec_variant = "ref", rec_input, rec_registry, rec_out;
    bool rec_fallback = false;
    rec_cmd->add_option("--bundle", rec_bundle, "recommender bundle directory")->required();
    rec_cmd->add_option("--variant", rec_variant, "ref or field");
    rec_cmd->add_option("--input", rec_input, "input refs JSONL")->required();
    rec_cmd->add_option("--registry", rec_registry,
                        "comma-separated builtin ids or a registry JSON file");
    rec_cmd->add_flag("--fallback-on-failure", rec_fallback,
                      "fall back to the next-ranked parser on failure");
    rec_cmd->add_option("--out", rec_out, "output JSONL")->required();

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "render an evaluation summary as text");
    std::string report_in, report_out;
    report_cmd->add_option("--summary", report_in, "evaluation summary JSON")->required();
    report_cmd->add_option("--out", report_out, "text output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidInput;
    }

    try {
        if (synth_cmd->parsed()) {
            RunManifest manifest = load_manifest_or_defaults(synth_config, synth_seed);
            if (synth_cmd->count("--seed") || synth_config.empty()) {
                manifest.seed = synth_seed;
                manifest.synth.seed = synth_seed;
                manifest.forest.seed = synth_seed;
            }
            if (synth_cmd->count("--docs")) manifest.synth.n_docs = synth_docs;
            if (synth_cmd->count("--refs-per-doc")) manifest.synth.refs_per_doc = synth_refs;
            const bool noise_flag = synth_cmd->count("--jitter") > 0 ||
                                    synth_cmd->count("--dropout") > 0 ||
                                    synth_cmd->count("--mix") > 0;
            if (manifest.synth.styles.empty()) manifest.synth.styles = default_styles();
            if (noise_flag) {
                for (auto& style : manifest.synth.styles) {
                    if (synth_cmd->count("--jitter")) style.noise.punctuation_jitter = synth_jitter;
                    if (synth_cmd->count("--dropout")) style.noise.field_dropout = synth_dropout;
                    if (synth_cmd->count("--mix")) style.noise.style_mix = synth_mix;
                }
            }
            const std::string corpus_hash = stage_synth(manifest, synth_out);
            if (!synth_manifest_out.empty())
                write_file(synth_manifest_out, manifest_to_json(manifest) + "\n");
            std::cout << "wrote " << synth_out << " (hash " << corpus_hash << ")\n";
        } else if (split_cmd->parsed()) {
            require_file(split_corpus_path, "corpus");
            stage_split(split_corpus_path, parse_fractions(split_fractions), split_seed, split_out);
            std::cout << "wrote " << split_out << "\n";
        } else if (run_cmd->parsed()) {
            require_file(run_corpus, "corpus");
            require_file(run_split, "split file");
            const auto which = split_from_name(run_split_name);
            if (!which) throw InvalidInput("--split-name must be train, meta or test");
            stage_run_parsers(run_corpus, run_split, *which, parse_registry(run_registry),
                              run_cache, run_out);
            std::cout << "wrote " << run_out << "\n";
        } else if (train_cmd->parsed()) {
            require_file(train_corpus, "corpus");
            require_file(train_split, "split file");
            require_file(train_table, "extraction table");
            TrainParams params;
            if (!train_config.empty()) {
                const RunManifest manifest = load_manifest_or_defaults(train_config, train_seed);
                params.vocab_size = manifest.vocab_size;
                params.forest = manifest.forest;
                params.linear_l2 = manifest.linear_l2;
                params.logistic = manifest.logistic;
                params.seed = manifest.seed;
                params.voting_threshold = manifest.voting_threshold;
            }
            if (train_cmd->count("--vocab-size")) params.vocab_size = train_vocab_size;
            if (train_cmd->count("--seed") || train_config.empty()) params.seed = train_seed;
            if (train_cmd->count("--linear-l2")) params.linear_l2 = train_linear_l2;
            if (train_cmd->count("--logistic-l2")) params.logistic.l2 = train_logistic_l2;
            if (train_cmd->count("--voting-threshold"))
                params.voting_threshold = train_voting_threshold;
            stage_train(train_corpus, train_split, train_table, train_variant, params, train_out);
            std::cout << "wrote " << train_out << "\n";
        } else if (eval_cmd->parsed()) {
            require_file(eval_corpus, "corpus");
            require_file(eval_split, "split file");
            require_file(eval_table, "extraction table");
            EvaluateInputs inputs;
            inputs.corpus_path = eval_corpus;
            inputs.split_path = eval_split;
            inputs.test_table_path = eval_table;
            inputs.ref_bundle_dir = eval_ref_bundle;
            inputs.field_bundle_dir = eval_field_bundle;
            inputs.baselines_path = eval_baselines;
            inputs.systems = split_csv(eval_systems);
            inputs.fallback_on_failure = eval_fallback;
            if (inputs.systems.empty()) throw InvalidInput("--systems is empty");
            const EvaluationSummary summary = stage_evaluate(inputs);
            write_file(eval_out, summary_to_json(summary) + "\n");
            if (!eval_report.empty()) write_file(eval_report, render_report_text(summary));
            if (!eval_csv.empty()) write_file(eval_csv, per_ref_scores_csv(summary.systems));
            std::cout << render_report_text(summary);
        } else if (rec_cmd->parsed()) {
            require_file(rec_input, "input refs");
            if (rec_variant != "ref" && rec_variant != "field")
                throw InvalidInput("--variant must be ref or field");
            stage_recommend(rec_bundle, rec_variant, rec_input, parse_registry(rec_registry),
                            rec_fallback, rec_out);
            std::cout << "wrote " << rec_out << "\n";
        } else if (report_cmd->parsed()) {
            require_file(report_in, "summary");
            std::ifstream in(report_in, std::ios::binary);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            const std::string rendered = render_report_text(summary_from_json(text));
            if (!report_out.empty()) write_file(report_out, rendered);
            std::cout << rendered;
        }
    } catch (const StaleArtifact& e) {
        std::cerr << "stale artifact: " << e.what() << "\n";
        return kExitStaleArtifact;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
