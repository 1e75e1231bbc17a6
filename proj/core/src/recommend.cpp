#include "parsrec/recommend.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "parsrec/errors.hpp"
#include "parsrec/hash.hpp"
#include "parsrec/version.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string system_display_name(const std::string& system_id) {
    if (system_id == kSystemSingleBest) return "SingleBest";
    if (system_id == kSystemHybrid) return "Hybrid";
    if (system_id == kSystemVoting) return "Voting";
    if (system_id == kSystemRef) return "ParsRec_Ref";
    if (system_id == kSystemField) return "ParsRec_Field";
    return system_id;
}

namespace {

// Scores descending; equal scores keep registry order (stable sort over a
// registry-ordered input).
Ranking rank_scores(const std::vector<std::string>& registry_order,
                    const std::vector<double>& scores) {
    Ranking r;
    r.entries.reserve(registry_order.size());
    for (std::size_t i = 0; i < registry_order.size(); ++i)
        r.entries.emplace_back(registry_order[i], scores[i]);
    std::stable_sort(r.entries.begin(), r.entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return r;
}

std::map<std::string, long long> type_value_counts(const ParsedReference& ref,
                                                   const std::string& type,
                                                   const EvalConfig& config) {
    std::map<std::string, long long> counts;
    for (const auto& f : ref.fields) {
        if (f.type != type) continue;
        counts[normalize_value(f.value)] += 1;
    }
    (void)config;
    return counts;
}

const ReferenceRecord& checked_truth(const ReferenceRecord& r) {
    if (!r.truth) throw InvalidInput("reference without ground truth: " + r.ref_id);
    return r;
}

}  // namespace

std::vector<std::vector<double>> per_parser_f1_table(const ExtractionTable& table,
                                                     const std::vector<ReferenceRecord>& refs,
                                                     const EvalConfig& config) {
    std::vector<std::vector<double>> out;
    out.reserve(refs.size());
    for (const auto& r : refs) {
        checked_truth(r);
        std::vector<double> row;
        row.reserve(table.parser_ids().size());
        for (const auto& parser_id : table.parser_ids()) {
            const ParseOutcome& cell = table.cell(parser_id, r.ref_id);
            row.push_back(score_reference(match_fields(cell.fields, *r.truth, config)).f1);
        }
        out.push_back(std::move(row));
    }
    return out;
}

bool type_extracted_correctly(const ParsedReference& extracted, const ParsedReference& truth,
                              const std::string& type, const EvalConfig& config) {
    return type_value_counts(extracted, type, config) == type_value_counts(truth, type, config);
}

RefRecommender train_ref_recommender(const ExtractionTable& table,
                                     const std::vector<ReferenceRecord>& meta_refs,
                                     const NgramVocabulary& vocab, double l2,
                                     const EvalConfig& eval_config) {
    if (meta_refs.empty()) throw InvalidInput("train_ref_recommender: empty meta set");

    RefRecommender rec;
    rec.registry_order = table.parser_ids();
    rec.vocab = vocab;
    rec.l2 = l2;

    std::vector<std::vector<double>> x;
    x.reserve(meta_refs.size());
    for (const auto& r : meta_refs) x.push_back(featurize(r.raw, vocab, rec.featurizer));
    const auto f1 = per_parser_f1_table(table, meta_refs, eval_config);

    for (std::size_t p = 0; p < rec.registry_order.size(); ++p) {
        std::vector<double> y(meta_refs.size());
        for (std::size_t i = 0; i < meta_refs.size(); ++i) y[i] = f1[i][p];
        rec.models.emplace(rec.registry_order[p], fit_linear(x, y, l2));
    }
    return rec;
}

FieldRecommender train_field_recommender(const ExtractionTable& table,
                                         const std::vector<ReferenceRecord>& meta_refs,
                                         const NgramVocabulary& vocab,
                                         const MetadataTypeSet& types, const TrainConfig& config,
                                         const EvalConfig& eval_config) {
    if (meta_refs.empty()) throw InvalidInput("train_field_recommender: empty meta set");

    FieldRecommender rec;
    rec.registry_order = table.parser_ids();
    rec.types = types;
    rec.vocab = vocab;
    rec.config = config;

    std::vector<std::vector<double>> x;
    x.reserve(meta_refs.size());
    for (const auto& r : meta_refs) x.push_back(featurize(r.raw, vocab, rec.featurizer));

    for (const auto& parser_id : rec.registry_order) {
        for (const auto& type : types.labels()) {
            std::vector<int> y(meta_refs.size());
            for (std::size_t i = 0; i < meta_refs.size(); ++i) {
                const auto& r = checked_truth(meta_refs[i]);
                const ParseOutcome& cell = table.cell(parser_id, r.ref_id);
                y[i] = type_extracted_correctly(cell.fields, *r.truth, type, eval_config) ? 1 : 0;
            }
            rec.models.emplace(std::make_pair(parser_id, type), fit_logistic(x, y, config));
        }
    }
    return rec;
}

Ranking recommend_ref(const RefRecommender& rec, const std::string& raw) {
    const auto features = featurize(raw, rec.vocab, rec.featurizer);
    std::vector<double> scores;
    scores.reserve(rec.registry_order.size());
    for (const auto& parser_id : rec.registry_order)
        scores.push_back(predict_linear(rec.models.at(parser_id), features).raw);
    return rank_scores(rec.registry_order, scores);
}

std::map<std::string, Ranking> recommend_field(const FieldRecommender& rec,
                                               const std::string& raw) {
    const auto features = featurize(raw, rec.vocab, rec.featurizer);
    std::map<std::string, Ranking> out;
    for (const auto& type : rec.types.labels()) {
        std::vector<double> scores;
        scores.reserve(rec.registry_order.size());
        for (const auto& parser_id : rec.registry_order)
            scores.push_back(predict_proba(rec.models.at({parser_id, type}), features));
        out.emplace(type, rank_scores(rec.registry_order, scores));
    }
    return out;
}

FieldSource table_source(const ExtractionTable& table, const std::string& ref_id) {
    return [&table, ref_id](const std::string& parser_id) { return table.cell(parser_id, ref_id); };
}

ParsedReference assemble_ref(const Ranking& ranking, const FieldSource& source,
                             const AssembleOptions& options, std::string* chosen) {
    for (const auto& [parser_id, _] : ranking.entries) {
        const ParseOutcome outcome = source(parser_id);
        if (outcome.failed && options.fallback_on_failure) continue;
        if (chosen) *chosen = parser_id;
        return outcome.failed ? ParsedReference{} : outcome.fields;
    }
    // Every parser failed under fallback: empty result, top parser charged.
    if (chosen) *chosen = ranking.top();
    return {};
}

ParsedReference assemble_field(const std::map<std::string, Ranking>& rankings,
                               const FieldSource& source, const AssembleOptions& options,
                               std::map<std::string, std::string>* chosen) {
    // Each distinct chosen parser runs once; results keyed for reuse.
    std::map<std::string, ParseOutcome> outcomes;
    const auto get = [&](const std::string& parser_id) -> const ParseOutcome& {
        auto it = outcomes.find(parser_id);
        if (it == outcomes.end()) it = outcomes.emplace(parser_id, source(parser_id)).first;
        return it->second;
    };

    ParsedReference out;
    for (const auto& [type, ranking] : rankings) {
        std::string picked;
        for (const auto& [parser_id, _] : ranking.entries) {
            const ParseOutcome& outcome = get(parser_id);
            if (outcome.failed && options.fallback_on_failure) continue;
            picked = parser_id;
            if (!outcome.failed)
                for (const auto& f : outcome.fields.fields)
                    if (f.type == type) out.fields.push_back(f);
            break;
        }
        if (picked.empty()) picked = ranking.top();  // all failed under fallback
        if (chosen) (*chosen)[type] = picked;
    }
    return out;
}

ParsedReference parse_with_ref(const RefRecommender& rec, const std::string& raw,
                               ParserRunner& runner, const AssembleOptions& options) {
    const Ranking ranking = recommend_ref(rec, raw);
    return assemble_ref(
        ranking, [&](const std::string& parser_id) { return runner.parse(parser_id, raw); },
        options);
}

ParsedReference parse_with_field(const FieldRecommender& rec, const std::string& raw,
                                 ParserRunner& runner, const AssembleOptions& options) {
    const auto rankings = recommend_field(rec, raw);
    return assemble_field(
        rankings, [&](const std::string& parser_id) { return runner.parse(parser_id, raw); },
        options);
}

BaselinePolicies fit_baselines(const ExtractionTable& table,
                               const std::vector<ReferenceRecord>& meta_refs,
                               const MetadataTypeSet& types, int voting_threshold,
                               const EvalConfig& eval_config) {
    if (meta_refs.empty()) throw InvalidInput("fit_baselines: empty meta set");
    if (voting_threshold < 1) throw InvalidInput("fit_baselines: voting threshold must be >= 1");

    BaselinePolicies policy;
    policy.voting_threshold = voting_threshold;

    // SingleBest: highest micro-F1 on the meta set; ties keep registry order.
    double best_f1 = -1.0;
    for (const auto& parser_id : table.parser_ids()) {
        MatchCounts totals;
        for (const auto& r : meta_refs) {
            checked_truth(r);
            const MatchCounts c =
                match_fields(table.cell(parser_id, r.ref_id).fields, *r.truth, eval_config);
            totals.tp += c.tp;
            totals.fp += c.fp;
            totals.fn += c.fn;
        }
        const double f1 = score_reference(totals).f1;
        if (f1 > best_f1) {
            best_f1 = f1;
            policy.single_best = parser_id;
        }
    }

    // Hybrid: per type, the parser with the highest type-restricted micro F1.
    for (const auto& type : types.labels()) {
        double best = -1.0;
        for (const auto& parser_id : table.parser_ids()) {
            MatchCounts totals;
            for (const auto& r : meta_refs) {
                ParsedReference eo, to;
                for (const auto& f : table.cell(parser_id, r.ref_id).fields.fields)
                    if (f.type == type) eo.fields.push_back(f);
                for (const auto& f : r.truth->fields)
                    if (f.type == type) to.fields.push_back(f);
                const MatchCounts c = match_fields(eo, to, eval_config);
                totals.tp += c.tp;
                totals.fp += c.fp;
                totals.fn += c.fn;
            }
            const double f1 = score_reference(totals).f1;
            if (f1 > best) {
                best = f1;
                policy.hybrid[type] = parser_id;
            }
        }
    }
    return policy;
}

ParsedReference parse_with_voting(const std::vector<ParseOutcome>& outputs, int threshold) {
    if (threshold < 1) throw InvalidInput("parse_with_voting: threshold must be >= 1");
    // (type, normalized value) -> {distinct parser count, max multiplicity}
    std::map<std::pair<std::string, std::string>, std::pair<int, long long>> votes;
    for (const auto& outcome : outputs) {
        if (outcome.failed) continue;
        std::map<std::pair<std::string, std::string>, long long> local;
        for (const auto& f : outcome.fields.fields)
            local[{f.type, normalize_value(f.value)}] += 1;
        for (const auto& [key, count] : local) {
            auto& v = votes[key];
            v.first += 1;
            v.second = std::max(v.second, count);
        }
    }
    ParsedReference out;
    for (const auto& [key, v] : votes) {
        if (v.first < threshold) continue;
        for (long long i = 0; i < v.second; ++i) out.add(key.first, key.second);
    }
    return out;
}

ParsedReference parse_with_voting(const std::vector<std::string>& registry_order,
                                  const FieldSource& source, int threshold) {
    std::vector<ParseOutcome> outputs;
    outputs.reserve(registry_order.size());
    for (const auto& parser_id : registry_order) outputs.push_back(source(parser_id));
    return parse_with_voting(outputs, threshold);
}

std::map<std::string, ParsedReference> outputs_single_parser(const ExtractionTable& table,
                                                             const std::string& parser_id) {
    std::map<std::string, ParsedReference> out;
    for (const auto& ref_id : table.ref_ids()) {
        const ParseOutcome& cell = table.cell(parser_id, ref_id);
        out[ref_id] = cell.failed ? ParsedReference{} : cell.fields;
    }
    return out;
}

std::map<std::string, ParsedReference> outputs_hybrid(const ExtractionTable& table,
                                                      const BaselinePolicies& policy,
                                                      const MetadataTypeSet& types) {
    std::map<std::string, ParsedReference> out;
    for (const auto& ref_id : table.ref_ids()) {
        ParsedReference assembled;
        for (const auto& type : types.labels()) {
            const std::string& parser_id = policy.hybrid.at(type);
            const ParseOutcome& cell = table.cell(parser_id, ref_id);
            if (cell.failed) continue;
            for (const auto& f : cell.fields.fields)
                if (f.type == type) assembled.fields.push_back(f);
        }
        out[ref_id] = std::move(assembled);
    }
    return out;
}

std::map<std::string, ParsedReference> outputs_voting(const ExtractionTable& table,
                                                      int threshold) {
    std::map<std::string, ParsedReference> out;
    for (const auto& ref_id : table.ref_ids()) {
        std::vector<ParseOutcome> outputs;
        outputs.reserve(table.parser_ids().size());
        for (const auto& parser_id : table.parser_ids())
            outputs.push_back(table.cell(parser_id, ref_id));
        out[ref_id] = parse_with_voting(outputs, threshold);
    }
    return out;
}

std::map<std::string, ParsedReference> outputs_ref_variant(const RefRecommender& rec,
                                                           const std::vector<ReferenceRecord>& refs,
                                                           const ExtractionTable& table,
                                                           const AssembleOptions& options,
                                                           std::vector<std::string>* choices) {
    std::map<std::string, ParsedReference> out;
    for (const auto& r : refs) {
        std::string chosen;
        out[r.ref_id] =
            assemble_ref(recommend_ref(rec, r.raw), table_source(table, r.ref_id), options, &chosen);
        if (choices) choices->push_back(chosen);
    }
    return out;
}

std::map<std::string, ParsedReference> outputs_field_variant(
    const FieldRecommender& rec, const std::vector<ReferenceRecord>& refs,
    const ExtractionTable& table, const AssembleOptions& options,
    std::vector<std::string>* choices) {
    std::map<std::string, ParsedReference> out;
    for (const auto& r : refs) {
        std::map<std::string, std::string> chosen;
        out[r.ref_id] = assemble_field(recommend_field(rec, r.raw), table_source(table, r.ref_id),
                                       options, &chosen);
        if (choices)
            for (const auto& [_, parser_id] : chosen) choices->push_back(parser_id);
    }
    return out;
}

// ---- persistence ----

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write file: " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open file: " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

void save_ref_recommender(const RefRecommender& rec, const std::string& dir,
                          const std::string& train_hash) {
    fs::create_directories(fs::path(dir) / "models");
    ordered_json manifest;
    manifest["kind"] = "ref_recommender";
    manifest["version"] = kVersion;
    manifest["registry"] = rec.registry_order;
    manifest["l2"] = rec.l2;
    manifest["train_hash"] = train_hash;
    manifest["split"] = "meta";
    write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    write_text_file((fs::path(dir) / "vocab.json").string(), vocabulary_to_json(rec.vocab) + "\n");
    for (const auto& [parser_id, model] : rec.models)
        write_text_file((fs::path(dir) / "models" / (parser_id + ".json")).string(),
                        linear_model_to_json(model, train_hash) + "\n");
}

RefRecommender load_ref_recommender(const std::string& dir) {
    ordered_json manifest = ordered_json::parse(read_text_file((fs::path(dir) / "manifest.json").string()));
    if (manifest.value("kind", "") != "ref_recommender")
        throw InvalidInput(dir + " is not a ref recommender bundle");
    RefRecommender rec;
    rec.registry_order = manifest.at("registry").get<std::vector<std::string>>();
    rec.l2 = manifest.value("l2", 1e-3);
    rec.vocab = vocabulary_from_json(read_text_file((fs::path(dir) / "vocab.json").string()));
    for (const auto& parser_id : rec.registry_order)
        rec.models.emplace(parser_id,
                           linear_model_from_json(read_text_file(
                               (fs::path(dir) / "models" / (parser_id + ".json")).string())));
    return rec;
}

void save_field_recommender(const FieldRecommender& rec, const std::string& dir,
                            const std::string& train_hash) {
    fs::create_directories(fs::path(dir) / "models");
    ordered_json manifest;
    manifest["kind"] = "field_recommender";
    manifest["version"] = kVersion;
    manifest["registry"] = rec.registry_order;
    manifest["types"] = rec.types.labels();
    manifest["config"] = {{"l2", rec.config.l2},
                          {"max_iterations", rec.config.max_iterations},
                          {"tolerance", rec.config.tolerance}};
    manifest["train_hash"] = train_hash;
    manifest["split"] = "meta";
    write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    write_text_file((fs::path(dir) / "vocab.json").string(), vocabulary_to_json(rec.vocab) + "\n");
    for (const auto& [key, model] : rec.models)
        write_text_file(
            (fs::path(dir) / "models" / (key.first + "__" + key.second + ".json")).string(),
            logistic_model_to_json(model, train_hash) + "\n");
}

FieldRecommender load_field_recommender(const std::string& dir) {
    ordered_json manifest = ordered_json::parse(read_text_file((fs::path(dir) / "manifest.json").string()));
    if (manifest.value("kind", "") != "field_recommender")
        throw InvalidInput(dir + " is not a field recommender bundle");
    FieldRecommender rec;
    rec.registry_order = manifest.at("registry").get<std::vector<std::string>>();
    rec.types = MetadataTypeSet(manifest.at("types").get<std::vector<std::string>>());
    if (manifest.contains("config")) {
        rec.config.l2 = manifest["config"].value("l2", 1.0);
        rec.config.max_iterations = manifest["config"].value("max_iterations", 100);
        rec.config.tolerance = manifest["config"].value("tolerance", 1e-6);
    }
    rec.vocab = vocabulary_from_json(read_text_file((fs::path(dir) / "vocab.json").string()));
    for (const auto& parser_id : rec.registry_order)
        for (const auto& type : rec.types.labels())
            rec.models.emplace(
                std::make_pair(parser_id, type),
                logistic_model_from_json(read_text_file(
                    (fs::path(dir) / "models" / (parser_id + "__" + type + ".json")).string())));
    return rec;
}

void save_baselines(const BaselinePolicies& policy, const std::string& path,
                    const std::string& train_hash) {
    ordered_json j;
    j["kind"] = "baselines";
    j["version"] = kVersion;
    j["single_best"] = policy.single_best;
    j["hybrid"] = policy.hybrid;
    j["voting_threshold"] = policy.voting_threshold;
    j["train_hash"] = train_hash;
    j["split"] = "meta";
    write_text_file(path, j.dump(2) + "\n");
}

BaselinePolicies load_baselines(const std::string& path, std::string* train_hash) {
    ordered_json j = ordered_json::parse(read_text_file(path));
    if (j.value("kind", "") != "baselines") throw InvalidInput(path + " is not a baselines file");
    BaselinePolicies policy;
    policy.single_best = j.at("single_best").get<std::string>();
    policy.hybrid = j.at("hybrid").get<std::map<std::string, std::string>>();
    policy.voting_threshold = j.value("voting_threshold", 3);
    if (train_hash) *train_hash = j.value("train_hash", "");
    return policy;
}

}  // namespace parsrec
