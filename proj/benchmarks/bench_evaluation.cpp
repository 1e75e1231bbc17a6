#include <benchmark/benchmark.h>

#include "parsrec/evaluate.hpp"

namespace {

using namespace parsrec;

ParsedReference sample_fields() {
    ParsedReference ref;
    ref.add("author", "Acilar, A.M.");
    ref.add("author", "Arslan, A.");
    ref.add("source", "Expert Systems with Applications");
    ref.add("volume", "36");
    ref.add("issue", "4");
    ref.add("year", "2008");
    ref.add("page", "8324");
    return ref;
}

void BM_match_fields(benchmark::State& state) {
    const auto a = sample_fields();
    auto b = sample_fields();
    b.fields[3].value = "37";  // one mismatch
    for (auto _ : state) benchmark::DoNotOptimize(match_fields(a, b));
}
BENCHMARK(BM_match_fields);

void BM_normalize_value(benchmark::State& state) {
    const std::string v = "  Expert  Systems with \t Applications ";
    for (auto _ : state) benchmark::DoNotOptimize(normalize_value(v));
}
BENCHMARK(BM_normalize_value);

void BM_paired_ttest(benchmark::State& state) {
    std::vector<double> a(300), b(300);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = 0.8 + 0.001 * static_cast<double>(i % 7);
        b[i] = 0.79 + 0.0012 * static_cast<double>(i % 5);
    }
    for (auto _ : state) benchmark::DoNotOptimize(paired_ttest(a, b));
}
BENCHMARK(BM_paired_ttest);

}  // namespace
