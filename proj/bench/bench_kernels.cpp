// Serial reference vs OpenMP kernel for ranking and embedding export.

#include <benchmark/benchmark.h>

#include "hotelalign/eval.hpp"
#include "hotelalign/synth.hpp"
#include "hotelalign/train.hpp"

using namespace hotelalign;

namespace {

struct Setup {
    World world;
    SessionSet sessions;
    ModelParams params;
    EmbeddingSpace space;
    std::vector<PredictionEvent> events;

    Setup()
    {
        WorldConfig wc;  // 5 x 200 hotels
        wc.n_sessions_per_brand = 5000;
        world = generate_world(wc);
        sessions = generate_sessions(world, "H", wc);
        TrainConfig tc;
        tc.init_scale = 16;
        params = ModelParams::initialize(world.catalog, tc);
        space = export_embeddings(params, world.catalog, "H");
        events = make_events(sessions, world.catalog);
    }
};

const Setup& setup()
{
    static const Setup s;
    return s;
}

void BM_RankEventsSerial(benchmark::State& state)
{
    const auto& s = setup();
    const auto lookup = SpaceLookup::in_brand(s.space, s.world.catalog);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            rank_events_serial(s.events, s.world.catalog, lookup, ScoreMode::cosine, PoolPolicy::market));
    state.SetItemsProcessed(state.iterations() * std::int64_t(s.events.size()));
}

void BM_RankEventsOpenMP(benchmark::State& state)
{
    const auto& s = setup();
    const auto lookup = SpaceLookup::in_brand(s.space, s.world.catalog);
    for (auto _ : state)
        benchmark::DoNotOptimize(rank_events(s.events, s.world.catalog, lookup, ScoreMode::cosine, PoolPolicy::market));
    state.SetItemsProcessed(state.iterations() * std::int64_t(s.events.size()));
}

void BM_ExportSerial(benchmark::State& state)
{
    const auto& s = setup();
    for (auto _ : state) benchmark::DoNotOptimize(export_embeddings_serial(s.params, s.world.catalog, "H"));
    state.SetItemsProcessed(state.iterations() * std::int64_t(s.world.catalog.size()));
}

void BM_ExportOpenMP(benchmark::State& state)
{
    const auto& s = setup();
    for (auto _ : state) benchmark::DoNotOptimize(export_embeddings(s.params, s.world.catalog, "H"));
    state.SetItemsProcessed(state.iterations() * std::int64_t(s.world.catalog.size()));
}

}  // namespace

BENCHMARK(BM_RankEventsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RankEventsOpenMP)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExportSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExportOpenMP)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
