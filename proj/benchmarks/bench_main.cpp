#include "revsmell/corpus.hpp"
#include "revsmell/diff.hpp"
#include "revsmell/gateway.hpp"
#include "revsmell/metrics.hpp"
#include "revsmell/prompt.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace revsmell;

namespace {

std::string synthetic_diff(int files, int hunks_per_file) {
    std::string out;
    for (int f = 0; f < files; ++f) {
        const auto path = "src/module_" + std::to_string(f) + ".cc";
        out += "diff --git a/" + path + " b/" + path + "\n--- a/" + path + "\n+++ b/" + path + "\n";
        for (int h = 0; h < hunks_per_file; ++h) {
            const int start = 1 + h * 40;
            out += "@@ -" + std::to_string(start) + ",5 +" + std::to_string(start) + ",6 @@\n";
            out += " int f() {\n   int x = 0;\n-  return x;\n+  x += 1;\n+  return x;\n }\n \n";
        }
    }
    return out;
}

corpus::CorpusItem sample_item() {
    const auto files = diff::parse_unified_diff(synthetic_diff(1, 1));
    corpus::CorpusItem item;
    item.id = "bench";
    item.comment_text = "please return early here";
    item.span = {diff::Side::New, 3, 4};
    item.hunk_text = diff::mark_span(files[0].hunks[0], item.span);
    item.discussion_url = "https://review.example.org/c/1";
    return item;
}

void BM_ParseDiff(benchmark::State& state) {
    const auto text = synthetic_diff(static_cast<int>(state.range(0)), 10);
    for (auto _ : state) benchmark::DoNotOptimize(diff::parse_unified_diff(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseDiff)->Arg(1)->Arg(10)->Arg(100);

void BM_Summarize(benchmark::State& state) {
    std::mt19937_64 rng(1);
    auto m = metrics::ConfusionMatrix::full();
    for (std::size_t g = 0; g < kLabelCount; ++g)
        for (std::size_t p = 0; p < kLabelCount; ++p) m.at(g, p) = rng() % 50;
    for (auto _ : state) benchmark::DoNotOptimize(metrics::summarize(m));
}
BENCHMARK(BM_Summarize);

void BM_RenderZeroShot(benchmark::State& state) {
    const auto item = sample_item();
    for (auto _ : state) benchmark::DoNotOptimize(prompt::render_prompt(item, prompt::Mode::ZeroShot, nullptr));
}
BENCHMARK(BM_RenderZeroShot);

void BM_StubBatch(benchmark::State& state) {
    std::vector<corpus::CorpusItem> items;
    for (int i = 0; i < 439; ++i) {
        auto item = sample_item();
        item.id = "item-" + std::to_string(1000 + i);
        items.push_back(item);
    }
    gateway::StubBackend stub(gateway::default_stub_rules());
    const auto config = gateway::default_config("stub", "stub");
    for (auto _ : state)
        benchmark::DoNotOptimize(gateway::run_batch(items, {}, config, stub, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_StubBatch)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
