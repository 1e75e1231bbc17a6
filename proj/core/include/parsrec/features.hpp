#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "parsrec/random_forest.hpp"
#include "parsrec/tokenize.hpp"

namespace parsrec {

// The nine heuristic style features, in the fixed order they occupy at the
// head of every feature vector.
struct HeuristicFeatures {
    double length = 0.0;
    double comma_count = 0.0;
    double comma_fraction = 0.0;
    double dot_count = 0.0;
    double dot_fraction = 0.0;
    double semicolon_count = 0.0;
    double semicolon_fraction = 0.0;
    double starts_bracket_enum = 0.0;
    double starts_dot_enum = 0.0;

    std::vector<double> as_vector() const;
};

inline constexpr std::size_t kHeuristicFeatureCount = 9;

enum class FractionDenominator { TokenCount, CharCount };

struct FeaturizerConfig {
    // The paper-style punctuation fractions are normalized by token count;
    // a character-count denominator can be swapped in.
    FractionDenominator fraction_denominator = FractionDenominator::TokenCount;
};

HeuristicFeatures heuristic_features(std::string_view raw,
                                     const FeaturizerConfig& config = {});

// A class-sequence n-gram of length 3 or 4.
struct NgramPattern {
    std::vector<TokenClass> classes;

    bool operator==(const NgramPattern&) const = default;
    bool operator<(const NgramPattern& other) const { return classes < other.classes; }
};

// All contiguous 3- and 4-grams over the token-class sequence, with counts.
std::map<NgramPattern, int> extract_ngrams(const std::vector<Token>& tokens);

struct ForestProvenance {
    std::uint64_t seed = 0;
    ForestParams params;
};

// Ordered n-gram vocabulary; the feature index of a pattern is its list
// position. Selection provenance is persisted alongside the patterns.
struct NgramVocabulary {
    std::vector<NgramPattern> patterns;
    std::size_t k = 0;
    ForestProvenance provenance;

    std::size_t size() const { return patterns.size(); }
};

inline constexpr std::size_t kDefaultVocabularySize = 150;

// Selects the K most important candidate n-grams by random-forest impurity
// importance. The forest's classification target for each reference is the
// identity of the parser with the highest F1 on it (ties to the lowest
// parser index). Ranking ties break by candidate frequency, then by pattern
// order. Deterministic given the seed.
NgramVocabulary build_vocabulary(const std::vector<std::string>& raw_refs,
                                 const std::vector<std::vector<double>>& per_parser_f1,
                                 std::size_t k, const ForestParams& forest_params,
                                 std::uint64_t seed);

// 9 heuristics followed by one 0/1 indicator per vocabulary pattern.
std::vector<double> featurize(std::string_view raw, const NgramVocabulary& vocab,
                              const FeaturizerConfig& config = {});

std::string vocabulary_to_json(const NgramVocabulary& vocab);
NgramVocabulary vocabulary_from_json(const std::string& text);

}  // namespace parsrec
