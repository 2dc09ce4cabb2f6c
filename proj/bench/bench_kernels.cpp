// Serial reference vs OpenMP kernel, pairwise, on the planted corpus.

#include <benchmark/benchmark.h>

#include <random>

#include "healthgrade/eval.hpp"
#include "healthgrade/synth.hpp"

using namespace hg;

namespace {

struct Fixture {
    synth::PlantedCorpus planted;
    std::vector<CleanDocument> clean;
    Analyzers analyzers;
    std::vector<AnalyzedDocument> docs;
    FeaturePipeline pipeline;
    Matrix dense;
    Labels y;

    Fixture() {
        set_warnings_enabled(false);
        synth::PlantedConfig cfg;
        cfg.articles = 400;
        planted = synth::make_planted_corpus(cfg);
        clean = preprocess_all(planted.corpus.articles, PipelineConfig::defaults());
        analyzers = Analyzers::defaults();
        docs = analyze_all(planted.corpus.articles, clean, analyzers);
        pipeline = FeaturePipeline::fit(docs, CategoryLexicon::builtin(), RankTable::builtin(),
                                        analyzers.tagger->tagset());
        dense = pipeline.transform_dense(docs);
        for (const auto& l : planted.corpus.labels) y.push_back(l.at(CriterionId(1)) == Label::Satisfactory ? 1 : 0);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_preprocess_serial(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(preprocess_all_serial(f.planted.corpus.articles, PipelineConfig::defaults()));
}
void BM_preprocess_parallel(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(preprocess_all(f.planted.corpus.articles, PipelineConfig::defaults()));
}

void BM_analyze_serial(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(analyze_all_serial(f.planted.corpus.articles, f.clean, f.analyzers));
}
void BM_analyze_parallel(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(analyze_all(f.planted.corpus.articles, f.clean, f.analyzers));
}

void BM_transform_serial(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(f.pipeline.transform_dense_serial(f.docs));
}
void BM_transform_parallel(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(f.pipeline.transform_dense(f.docs));
}

void BM_pearson_serial(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(pearson_scores_serial(f.dense, f.y));
}
void BM_pearson_parallel(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(pearson_scores(f.dense, f.y));
}

void BM_kernel_serial(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(kernel_matrix_serial(f.dense, 1));
}
void BM_kernel_parallel(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(kernel_matrix(f.dense, 1));
}

void BM_forest_serial(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st)
        benchmark::DoNotOptimize(RandomForest::fit_serial(f.dense, f.y, 50, MaxFeaturesRule::Sqrt, 1));
}
void BM_forest_parallel(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(RandomForest::fit(f.dense, f.y, 50, MaxFeaturesRule::Sqrt, 1));
}

}  // namespace

BENCHMARK(BM_preprocess_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_preprocess_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_analyze_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_analyze_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transform_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transform_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pearson_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pearson_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kernel_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kernel_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forest_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forest_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
