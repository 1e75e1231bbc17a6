#include "parsrec/features.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "parsrec/errors.hpp"
#include "parsrec/unicode.hpp"
#include "parsrec/version.hpp"

namespace parsrec {

using ordered_json = nlohmann::ordered_json;

std::vector<double> HeuristicFeatures::as_vector() const {
    return {length,          comma_count,        comma_fraction,
            dot_count,       dot_fraction,       semicolon_count,
            semicolon_fraction, starts_bracket_enum, starts_dot_enum};
}

HeuristicFeatures heuristic_features(std::string_view raw, const FeaturizerConfig& config) {
    HeuristicFeatures h;
    const auto cps = uni::decode_utf8(raw);
    h.length = static_cast<double>(cps.size());
    for (char32_t cp : cps) {
        if (cp == U',') h.comma_count += 1.0;
        else if (cp == U'.') h.dot_count += 1.0;
        else if (cp == U';') h.semicolon_count += 1.0;
    }

    double denom;
    if (config.fraction_denominator == FractionDenominator::TokenCount)
        denom = static_cast<double>(tokenize(raw).size());
    else
        denom = h.length;
    if (denom > 0.0) {
        h.comma_fraction = h.comma_count / denom;
        h.dot_fraction = h.dot_count / denom;
        h.semicolon_fraction = h.semicolon_count / denom;
    }

    // Leading enumeration shapes: "[12]" and "12."
    std::size_t i = 0;
    while (i < cps.size() && uni::is_space(cps[i])) ++i;
    if (i < cps.size() && cps[i] == U'[') {
        std::size_t j = i + 1;
        while (j < cps.size() && uni::is_digit(cps[j])) ++j;
        if (j > i + 1 && j < cps.size() && cps[j] == U']') h.starts_bracket_enum = 1.0;
    } else {
        std::size_t j = i;
        while (j < cps.size() && uni::is_digit(cps[j])) ++j;
        if (j > i && j < cps.size() && cps[j] == U'.') h.starts_dot_enum = 1.0;
    }
    return h;
}

std::map<NgramPattern, int> extract_ngrams(const std::vector<Token>& tokens) {
    std::map<NgramPattern, int> out;
    for (std::size_t n = 3; n <= 4; ++n) {
        if (tokens.size() < n) continue;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            NgramPattern p;
            p.classes.reserve(n);
            for (std::size_t k = 0; k < n; ++k) p.classes.push_back(tokens[i + k].cls);
            out[std::move(p)] += 1;
        }
    }
    return out;
}

NgramVocabulary build_vocabulary(const std::vector<std::string>& raw_refs,
                                 const std::vector<std::vector<double>>& per_parser_f1,
                                 std::size_t k, const ForestParams& forest_params,
                                 std::uint64_t seed) {
    if (raw_refs.empty()) throw InvalidInput("build_vocabulary: empty reference set");
    if (per_parser_f1.size() != raw_refs.size())
        throw InvalidInput("build_vocabulary: F1 table does not cover the reference set");
    if (k < 1) throw InvalidInput("build_vocabulary: K must be >= 1");

    // Candidate enumeration. The map key order makes the candidate indexing
    // deterministic.
    std::map<NgramPattern, int> candidate_counts;
    std::vector<std::map<NgramPattern, int>> per_ref;
    per_ref.reserve(raw_refs.size());
    for (const auto& raw : raw_refs) {
        auto grams = extract_ngrams(tokenize(raw));
        for (const auto& [pattern, count] : grams) candidate_counts[pattern] += count;
        per_ref.push_back(std::move(grams));
    }

    NgramVocabulary vocab;
    vocab.k = k;
    vocab.provenance.seed = seed;
    vocab.provenance.params = forest_params;
    if (candidate_counts.empty()) return vocab;  // length-9 feature vectors are legal

    std::vector<const NgramPattern*> candidates;
    std::map<NgramPattern, std::size_t> index_of;
    for (const auto& [pattern, _] : candidate_counts) {
        index_of[pattern] = candidates.size();
        candidates.push_back(&pattern);
    }

    // Classification target: the best parser per reference.
    std::vector<int> target(raw_refs.size(), 0);
    for (std::size_t i = 0; i < raw_refs.size(); ++i) {
        const auto& f1s = per_parser_f1[i];
        if (f1s.empty()) throw InvalidInput("build_vocabulary: empty F1 row");
        std::size_t best = 0;
        for (std::size_t p = 1; p < f1s.size(); ++p)
            if (f1s[p] > f1s[best]) best = p;
        target[i] = static_cast<int>(best);
    }

    std::vector<double> importance(candidates.size(), 0.0);
    if (raw_refs.size() >= 2) {
        std::vector<std::vector<double>> x(raw_refs.size(),
                                           std::vector<double>(candidates.size(), 0.0));
        for (std::size_t i = 0; i < raw_refs.size(); ++i)
            for (const auto& [pattern, _] : per_ref[i]) x[i][index_of[pattern]] = 1.0;
        ForestParams params = forest_params;
        params.seed = seed;
        const RandomForest forest = fit_random_forest(x, target, params);
        importance = feature_importances(forest);
    }

    // Rank: importance desc, then frequency desc, then pattern order.
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (importance[a] != importance[b]) return importance[a] > importance[b];
        const int ca = candidate_counts.at(*candidates[a]);
        const int cb = candidate_counts.at(*candidates[b]);
        if (ca != cb) return ca > cb;
        return *candidates[a] < *candidates[b];
    });

    const std::size_t take = std::min(k, candidates.size());
    vocab.patterns.reserve(take);
    for (std::size_t i = 0; i < take; ++i) vocab.patterns.push_back(*candidates[order[i]]);
    return vocab;
}

std::vector<double> featurize(std::string_view raw, const NgramVocabulary& vocab,
                              const FeaturizerConfig& config) {
    std::vector<double> out = heuristic_features(raw, config).as_vector();
    out.reserve(kHeuristicFeatureCount + vocab.patterns.size());
    if (vocab.patterns.empty()) return out;
    const auto grams = extract_ngrams(tokenize(raw));
    for (const auto& pattern : vocab.patterns)
        out.push_back(grams.count(pattern) > 0 ? 1.0 : 0.0);
    return out;
}

std::string vocabulary_to_json(const NgramVocabulary& vocab) {
    ordered_json j;
    j["version"] = kVersion;
    j["kind"] = "ngram_vocabulary";
    j["k"] = vocab.k;
    j["seed"] = vocab.provenance.seed;
    const auto& p = vocab.provenance.params;
    j["forest_params"] = {{"n_trees", p.n_trees},
                          {"max_depth", p.max_depth},
                          {"min_samples_leaf", p.min_samples_leaf},
                          {"features_per_split_fraction", p.features_per_split_fraction},
                          {"bootstrap", p.bootstrap}};
    ordered_json patterns = ordered_json::array();
    for (const auto& pattern : vocab.patterns) {
        ordered_json names = ordered_json::array();
        for (TokenClass c : pattern.classes) names.push_back(token_class_name(c));
        patterns.push_back(std::move(names));
    }
    j["patterns"] = std::move(patterns);
    return j.dump(2);
}

NgramVocabulary vocabulary_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    if (j.value("kind", "") != "ngram_vocabulary")
        throw InvalidInput("file is not an n-gram vocabulary");
    NgramVocabulary vocab;
    vocab.k = j.value("k", std::size_t{0});
    vocab.provenance.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("forest_params")) {
        const auto& p = j.at("forest_params");
        vocab.provenance.params.n_trees = p.value("n_trees", 100);
        vocab.provenance.params.max_depth = p.value("max_depth", 12);
        vocab.provenance.params.min_samples_leaf = p.value("min_samples_leaf", 5);
        vocab.provenance.params.features_per_split_fraction =
            p.value("features_per_split_fraction", 1.0);
        vocab.provenance.params.bootstrap = p.value("bootstrap", true);
    }
    for (const auto& names : j.at("patterns")) {
        NgramPattern pattern;
        for (const auto& name : names) {
            const int c = token_class_from_name(name.get<std::string>());
            if (c < 0) throw InvalidInput("unknown token class in vocabulary: " +
                                          name.get<std::string>());
            pattern.classes.push_back(static_cast<TokenClass>(c));
        }
        vocab.patterns.push_back(std::move(pattern));
    }
    return vocab;
}

}  // namespace parsrec
