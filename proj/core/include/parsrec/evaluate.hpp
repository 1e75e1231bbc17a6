#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parsrec/types.hpp"

namespace parsrec {

struct EvalConfig {
    // Exact, case-sensitive value equality after normalization; a
    // case-insensitive mode exists as a flag.
    bool case_insensitive = false;
};

// Canonical composition, outer trim, inner whitespace runs collapsed to one
// space. Case is preserved.
std::string normalize_value(std::string_view v);

struct MatchCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
};

// Multiset intersection over (type, normalized value):
// tp = sum over keys of min(extracted count, truth count).
MatchCounts match_fields(const ParsedReference& extracted, const ParsedReference& truth,
                         const EvalConfig& config = {});

struct RefScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    MatchCounts counts;
};

// Precision/recall/F1 with the empty-side conventions: both sides empty
// scores 1.0 across the board, exactly one side empty scores 0.
RefScore score_reference(const MatchCounts& counts);

struct PerRefScore {
    std::string ref_id;
    RefScore score;
};

struct CorpusReport {
    std::string system;
    std::size_t n_refs = 0;
    std::size_t n_docs = 0;
    double micro_precision = 0.0;
    double micro_recall = 0.0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;  // mean of the per-document mean F1s
    double fp_rate = 0.0;   // 1 - micro precision
    double fn_rate = 0.0;   // 1 - micro recall
    MatchCounts totals;
    std::map<std::string, double> per_type_f1;         // restricted micro F1
    std::map<std::string, double> doc_mean_f1;         // t-test pairing unit
    std::vector<PerRefScore> per_ref;
    // Share of recommendations per parser, filled only for recommender
    // variants; shares sum to 1.
    std::map<std::string, double> choice_distribution;
};

// Scores one system's outputs against the ground truth. `outputs` must
// cover exactly the refs of `records`; every record needs truth.
CorpusReport evaluate_system(const std::string& system_name,
                             const std::map<std::string, ParsedReference>& outputs,
                             const std::vector<ReferenceRecord>& records,
                             const MetadataTypeSet& types, const EvalConfig& config = {});

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    // All pairwise differences were exactly zero; t is undefined and the
    // comparison is reported as "no difference".
    bool no_difference = false;
};

// Paired Student t-test over per-document mean F1s, paired by position.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

// Shares per parser over a sequence of choices (refs for the Ref variant,
// ref x type pairs for the Field variant), aligned to registry order.
std::map<std::string, double> choice_distribution(const std::vector<std::string>& choices,
                                                  const std::vector<std::string>& registry_order);

std::string report_to_json(const CorpusReport& report);
CorpusReport report_from_json(const std::string& text);

// One CSV line per reference: ref_id, system, tp, fp, fn, p, r, f1.
std::string per_ref_scores_csv(const std::vector<CorpusReport>& reports);

}  // namespace parsrec
