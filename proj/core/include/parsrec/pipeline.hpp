#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parsrec/evaluate.hpp"
#include "parsrec/features.hpp"
#include "parsrec/logistic_model.hpp"
#include "parsrec/parsers.hpp"
#include "parsrec/recommend.hpp"
#include "parsrec/synth.hpp"
#include "parsrec/types.hpp"

namespace parsrec {

// Everything needed to reproduce a run byte-for-byte.
struct RunManifest {
    std::uint64_t seed = 0;
    SynthParams synth;
    SplitFractions fractions;
    std::size_t vocab_size = kDefaultVocabularySize;
    ForestParams forest;
    double linear_l2 = 1e-3;
    TrainConfig logistic;
    std::vector<std::string> registry_ids;
    int voting_threshold = 3;
    bool fallback_on_failure = false;

    static RunManifest defaults(std::uint64_t seed);
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

struct PairwiseTTest {
    std::string system_a;
    std::string system_b;
    TTestResult result;
};

struct EvaluationSummary {
    std::vector<CorpusReport> systems;   // one per evaluated system id
    std::vector<PairwiseTTest> ttests;   // every requested pair
    std::size_t cross_split_duplicates = 0;
    std::string corpus_hash;
    std::string table_refs_hash;

    const CorpusReport& report_for(const std::string& system_id) const;
};

std::string summary_to_json(const EvaluationSummary& summary);
EvaluationSummary summary_from_json(const std::string& text);

// Aligned plain-text comparison table (systems x precision/recall/F1/rates)
// plus t-tests and choice distributions.
std::string render_report_text(const EvaluationSummary& summary);

// ---- pipeline stages; the CLI subcommands are thin wrappers ----

// Writes the synthetic corpus; returns its file hash.
std::string stage_synth(const RunManifest& manifest, const std::string& corpus_path);

void stage_split(const std::string& corpus_path, const SplitFractions& fractions,
                 std::uint64_t seed, const std::string& split_path);

// Runs every registry parser over one split of the corpus and writes the
// extraction table. Validates the split file against the corpus.
void stage_run_parsers(const std::string& corpus_path, const std::string& split_path,
                       Split which, const ParserRegistry& registry,
                       const std::string& cache_dir, const std::string& table_path);

struct TrainParams {
    std::size_t vocab_size = kDefaultVocabularySize;
    ForestParams forest;
    double linear_l2 = 1e-3;
    TrainConfig logistic;
    std::uint64_t seed = 0;
    int voting_threshold = 3;
};

// variant: "ref", "field" or "baselines". Reads the meta-split extraction
// table and writes the bundle under out_dir.
void stage_train(const std::string& corpus_path, const std::string& split_path,
                 const std::string& meta_table_path, const std::string& variant,
                 const TrainParams& params, const std::string& out_dir);

struct EvaluateInputs {
    std::string corpus_path;
    std::string split_path;
    std::string test_table_path;
    std::string ref_bundle_dir;      // required for system parsrec_ref
    std::string field_bundle_dir;    // required for system parsrec_field
    std::string baselines_path;      // required for the baseline systems
    std::vector<std::string> systems;
    bool fallback_on_failure = false;
};

EvaluationSummary stage_evaluate(const EvaluateInputs& inputs);

// Applies a saved recommender to (possibly unlabeled) refs with live
// parsers and writes one JSONL line per input ref.
void stage_recommend(const std::string& bundle_dir, const std::string& variant,
                     const std::string& input_path, const ParserRegistry& registry,
                     bool fallback_on_failure, const std::string& out_path);

}  // namespace parsrec
