#include <benchmark/benchmark.h>

#include "parsrec/parsers.hpp"
#include "parsrec/synth.hpp"

namespace {

using namespace parsrec;

void BM_builtin_parse_own_style(benchmark::State& state) {
    SynthParams params;
    params.styles = default_styles(NoiseKnobs{0.0, 0.0, 0.0});
    params.n_docs = 20;
    params.refs_per_doc = 10;
    params.seed = 5;
    const auto corpus = synth(params);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& r = corpus.records[i++ % corpus.records.size()];
        benchmark::DoNotOptimize(builtin_parse("bracket", r.raw));
    }
}
BENCHMARK(BM_builtin_parse_own_style);

void BM_builtin_parse_all_five(benchmark::State& state) {
    const std::string ref =
        "[2] A.M. Acilar, A. Arslan, A collaborative filtering method, Expert Systems with "
        "Applications 36 (4) (2008) 8324–8332.";
    const auto registry = builtin_registry();
    for (auto _ : state) {
        for (const auto& d : registry.parsers)
            benchmark::DoNotOptimize(builtin_parse(d.parser_id, ref));
    }
}
BENCHMARK(BM_builtin_parse_all_five);

}  // namespace
