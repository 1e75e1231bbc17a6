#include <benchmark/benchmark.h>

#include "parsrec/features.hpp"
#include "parsrec/synth.hpp"
#include "parsrec/tokenize.hpp"

namespace {

using namespace parsrec;

const std::string kRef =
    "[2] A.M. Acilar, A. Arslan, A collaborative filtering method based on artificial "
    "immune network, Expert Systems with Applications 36 (4) (2008) 8324–8332.";

NgramVocabulary demo_vocab() {
    SynthParams params;
    params.styles = default_styles();
    params.n_docs = 40;
    params.refs_per_doc = 5;
    params.seed = 3;
    const auto corpus = synth(params);
    std::vector<std::string> raws;
    std::vector<std::vector<double>> f1;
    for (const auto& r : corpus.records) {
        raws.push_back(r.raw);
        f1.push_back({0.5, 0.6});
    }
    ForestParams forest;
    forest.n_trees = 20;
    return build_vocabulary(raws, f1, 150, forest, 3);
}

void BM_tokenize(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(tokenize(kRef));
}
BENCHMARK(BM_tokenize);

void BM_heuristic_features(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(heuristic_features(kRef));
}
BENCHMARK(BM_heuristic_features);

void BM_featurize(benchmark::State& state) {
    const auto vocab = demo_vocab();
    for (auto _ : state) benchmark::DoNotOptimize(featurize(kRef, vocab));
}
BENCHMARK(BM_featurize);

}  // namespace

BENCHMARK_MAIN();
