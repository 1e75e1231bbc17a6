#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "parsrec/evaluate.hpp"
#include "parsrec/extraction.hpp"
#include "parsrec/features.hpp"
#include "parsrec/linear_model.hpp"
#include "parsrec/logistic_model.hpp"
#include "parsrec/types.hpp"

namespace parsrec {

// Stable system identifiers used in reports and on the command line.
inline constexpr const char* kSystemSingleBest = "single_best";
inline constexpr const char* kSystemHybrid = "hybrid";
inline constexpr const char* kSystemVoting = "voting";
inline constexpr const char* kSystemRef = "parsrec_ref";
inline constexpr const char* kSystemField = "parsrec_field";

// Display names for report tables.
std::string system_display_name(const std::string& system_id);

// Parsers ordered best-first; scores non-increasing, ties broken by
// registry order. Covers every registered parser exactly once.
struct Ranking {
    std::vector<std::pair<std::string, double>> entries;

    const std::string& top() const { return entries.front().first; }
};

// One F1-regression model per parser over a shared feature space.
struct RefRecommender {
    std::vector<std::string> registry_order;
    NgramVocabulary vocab;
    std::map<std::string, LinearModel> models;
    double l2 = 1e-3;
    FeaturizerConfig featurizer;
};

// One correctness classifier per (parser, metadata type) pair.
struct FieldRecommender {
    std::vector<std::string> registry_order;
    MetadataTypeSet types;
    NgramVocabulary vocab;
    std::map<std::pair<std::string, std::string>, LogisticModel> models;  // (parser, type)
    TrainConfig config;
    FeaturizerConfig featurizer;
};

struct BaselinePolicies {
    std::string single_best;
    std::map<std::string, std::string> hybrid;  // metadata type -> parser
    int voting_threshold = 3;
};

// Per-reference F1 of every parser, rows aligned to `refs`, columns to the
// table's registry order. This is the response table the Ref variant
// regresses on and the target source for vocabulary selection.
std::vector<std::vector<double>> per_parser_f1_table(const ExtractionTable& table,
                                                     const std::vector<ReferenceRecord>& refs,
                                                     const EvalConfig& config = {});

// Was `type` extracted correctly: the multiset of the parser's normalized
// values of that type equals the ground truth's (both empty counts as
// correct).
bool type_extracted_correctly(const ParsedReference& extracted, const ParsedReference& truth,
                              const std::string& type, const EvalConfig& config = {});

RefRecommender train_ref_recommender(const ExtractionTable& table,
                                     const std::vector<ReferenceRecord>& meta_refs,
                                     const NgramVocabulary& vocab, double l2 = 1e-3,
                                     const EvalConfig& eval_config = {});

FieldRecommender train_field_recommender(const ExtractionTable& table,
                                         const std::vector<ReferenceRecord>& meta_refs,
                                         const NgramVocabulary& vocab,
                                         const MetadataTypeSet& types,
                                         const TrainConfig& config = {},
                                         const EvalConfig& eval_config = {});

Ranking recommend_ref(const RefRecommender& rec, const std::string& raw);
std::map<std::string, Ranking> recommend_field(const FieldRecommender& rec,
                                               const std::string& raw);

// Where assembled outputs take parser results from: the live runner or a
// precomputed extraction table (both paths must agree for builtins).
using FieldSource = std::function<ParseOutcome(const std::string& parser_id)>;

FieldSource table_source(const ExtractionTable& table, const std::string& ref_id);

struct AssembleOptions {
    // Fall back to the next-ranked parser when the chosen one failed.
    bool fallback_on_failure = false;
};

// Output of the top-ranked parser, unchanged.
ParsedReference assemble_ref(const Ranking& ranking, const FieldSource& source,
                             const AssembleOptions& options = {},
                             std::string* chosen = nullptr);

// Per type, all fields of that type from that type's chosen parser. Never
// mixes two parsers within one type.
ParsedReference assemble_field(const std::map<std::string, Ranking>& rankings,
                               const FieldSource& source, const AssembleOptions& options = {},
                               std::map<std::string, std::string>* chosen = nullptr);

class ParserRunner;

ParsedReference parse_with_ref(const RefRecommender& rec, const std::string& raw,
                               ParserRunner& runner, const AssembleOptions& options = {});
ParsedReference parse_with_field(const FieldRecommender& rec, const std::string& raw,
                                 ParserRunner& runner, const AssembleOptions& options = {});

BaselinePolicies fit_baselines(const ExtractionTable& table,
                               const std::vector<ReferenceRecord>& meta_refs,
                               const MetadataTypeSet& types, int voting_threshold = 3,
                               const EvalConfig& eval_config = {});

// Voting ensemble: a (type, normalized value) field is included once iff it
// appears in the output of at least `threshold` distinct parsers; its
// multiplicity is the maximum among the agreeing parsers.
ParsedReference parse_with_voting(const std::vector<ParseOutcome>& outputs, int threshold);

// Convenience: run the vote over every registered parser via `source`.
ParsedReference parse_with_voting(const std::vector<std::string>& registry_order,
                                  const FieldSource& source, int threshold);

// ---- whole-corpus system outputs over one extraction table ----

std::map<std::string, ParsedReference> outputs_single_parser(const ExtractionTable& table,
                                                             const std::string& parser_id);
std::map<std::string, ParsedReference> outputs_hybrid(const ExtractionTable& table,
                                                      const BaselinePolicies& policy,
                                                      const MetadataTypeSet& types);
std::map<std::string, ParsedReference> outputs_voting(const ExtractionTable& table, int threshold);
std::map<std::string, ParsedReference> outputs_ref_variant(
    const RefRecommender& rec, const std::vector<ReferenceRecord>& refs,
    const ExtractionTable& table, const AssembleOptions& options = {},
    std::vector<std::string>* choices = nullptr);
std::map<std::string, ParsedReference> outputs_field_variant(
    const FieldRecommender& rec, const std::vector<ReferenceRecord>& refs,
    const ExtractionTable& table, const AssembleOptions& options = {},
    std::vector<std::string>* choices = nullptr);

// ---- persistence ----

void save_ref_recommender(const RefRecommender& rec, const std::string& dir,
                          const std::string& train_hash);
RefRecommender load_ref_recommender(const std::string& dir);
void save_field_recommender(const FieldRecommender& rec, const std::string& dir,
                            const std::string& train_hash);
FieldRecommender load_field_recommender(const std::string& dir);
void save_baselines(const BaselinePolicies& policy, const std::string& path,
                    const std::string& train_hash);
BaselinePolicies load_baselines(const std::string& path, std::string* train_hash = nullptr);

}  // namespace parsrec
