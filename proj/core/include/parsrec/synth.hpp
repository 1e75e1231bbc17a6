#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "parsrec/types.hpp"

namespace parsrec {

struct NoiseKnobs {
    double punctuation_jitter = 0.15;  // one formatting mutation per hit
    double field_dropout = 0.15;       // issue omitted from the rendering
    double style_mix = 0.10;           // ref rendered in a non-dominant style
};

// A rendering style: maps a ground-truth tuple to a reference string that
// the builtin parser of the same name inverts exactly when noise is zero.
struct SynthStyleSpec {
    std::string name;     // must name a builtin style parser
    double weight = 1.0;  // share of documents with this dominant style
    NoiseKnobs noise;
};

struct SynthParams {
    std::vector<SynthStyleSpec> styles;
    std::size_t n_docs = 1000;
    std::size_t refs_per_doc = 15;
    std::uint64_t seed = 0;
};

// The five shipped styles with their default document shares
// (bracket .30, apa .25, semi .20, dotnum .15, plain .10).
std::vector<SynthStyleSpec> default_styles(const NoiseKnobs& noise = {});

// Sampled ground-truth values for one reference.
struct RefTuple {
    int enum_no = 1;
    std::vector<std::pair<std::string, std::string>> authors;  // (surname, initial letters)
    std::vector<std::string> title_words;
    std::string source;
    int year = 2000;
    int volume = 1;
    int issue = -1;  // -1: absent
    int page = 2100;
    int page_end = 2110;
};

// Renders the tuple in the named style. The truth carries the clean surface
// values; `jitter_op` >= 0 applies one formatting mutation to the string
// only (the truth stays clean).
std::pair<std::string, ParsedReference> render_reference(const std::string& style,
                                                         const RefTuple& tuple,
                                                         int jitter_op = -1);

inline constexpr int kJitterOpCount = 7;

// Deterministic synthetic corpus: documents get a dominant style by exact
// largest-remainder allocation over the style weights; refs are rendered
// with the configured noise. Same params, same bytes.
Corpus synth(const SynthParams& params);

}  // namespace parsrec
