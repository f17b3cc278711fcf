// Microbenchmarks for the hot paths: per-row ingest in each mode, the
// query layer, and snapshot round-trips. Streams are pregenerated so the
// timed region is the engine alone. Run with --benchmark_min_time=2s for
// stable numbers; ingest costs depend on the live checkpoint count, so
// the loop warms each histogram past its steady state first.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "dpmat/analytics.hpp"
#include "dpmat/continual.hpp"
#include "dpmat/histogram.hpp"
#include "dpmat/rng.hpp"

namespace {

using namespace dpmat;

std::vector<Vector> make_rows(std::uint64_t seed, int d, int n) {
  Rng rng(seed, "bench-rows");
  std::vector<Vector> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vector v(d);
    for (int j = 0; j < d; ++j) v(j) = rng.gaussian();
    const double norm = v.norm();
    rows.push_back(v * (rng.uniform01() / (norm > 1e-12 ? norm : 1.0)));
  }
  return rows;
}

SpectralHistogram bench_hist(Mode mode, int d, std::uint64_t W) {
  HistogramConfig cfg;
  cfg.mode = mode;
  cfg.W = W;
  cfg.eta = 0.25;
  cfg.r = std::min(d, 4);
  cfg.d = d;
  cfg.budget = make_budget(1.0, 1e-4);
  cfg.seed = 42;
  return SpectralHistogram::make(cfg);
}

void ingest_bench(benchmark::State& state, Mode mode) {
  const int d = static_cast<int>(state.range(0));
  const std::uint64_t W = static_cast<std::uint64_t>(state.range(1));
  SpectralHistogram h = bench_hist(mode, d, W);
  const std::vector<Vector> rows = make_rows(1, d, 1024);
  std::size_t i = 0;
  // Fill the window so the timed loop sees steady-state compaction.
  for (std::uint64_t t = 0; t < 2 * W; ++t) {
    h.ingest(rows[i++ % rows.size()]);
  }
  for (auto _ : state) {
    h.ingest(rows[i++ % rows.size()]);
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["ell"] = static_cast<double>(h.checkpoint_count());
}

void BM_IngestExact(benchmark::State& state) {
  ingest_bench(state, Mode::exact);
}
void BM_IngestJl(benchmark::State& state) { ingest_bench(state, Mode::jl); }
void BM_IngestWishart(benchmark::State& state) {
  ingest_bench(state, Mode::wishart);
}

void BM_IngestTree(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const std::uint64_t W = static_cast<std::uint64_t>(state.range(1));
  TreeConfig cfg;
  cfg.W = W;
  cfg.d = d;
  cfg.budget = make_budget(1.0, 1e-4);
  cfg.seed = 42;
  DyadicTree tree = DyadicTree::make(cfg);
  const std::vector<Vector> rows = make_rows(2, d, 1024);
  std::size_t i = 0;
  for (std::uint64_t t = 0; t < 2 * W; ++t) {
    tree.tree_ingest(rows[i++ % rows.size()]);
  }
  for (auto _ : state) {
    tree.tree_ingest(rows[i++ % rows.size()]);
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["nodes"] = static_cast<double>(tree.node_count());
}

// Query-side latency on a warmed histogram. Queries are pure
// post-processing, so only the summary dimensions matter.
SpectralHistogram warmed(Mode mode, int d, std::uint64_t W) {
  SpectralHistogram h = bench_hist(mode, d, W);
  const std::vector<Vector> rows = make_rows(3, d, 512);
  for (std::uint64_t t = 0; t < 2 * W; ++t) {
    h.ingest(rows[t % rows.size()]);
  }
  return h;
}

void BM_QuerySpectral(benchmark::State& state) {
  SpectralHistogram h = warmed(Mode::jl, static_cast<int>(state.range(0)),
                               static_cast<std::uint64_t>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_approx(h, true));
  }
}

void BM_QueryPca(benchmark::State& state) {
  SpectralHistogram h = warmed(Mode::jl, static_cast<int>(state.range(0)),
                               static_cast<std::uint64_t>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pca(h, 2));
  }
}

void BM_QueryRegress(benchmark::State& state) {
  SpectralHistogram h =
      warmed(Mode::wishart, static_cast<int>(state.range(0)),
             static_cast<std::uint64_t>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(regress(h, 1));
  }
}

void BM_TreeQuery(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const std::uint64_t W = static_cast<std::uint64_t>(state.range(1));
  TreeConfig cfg;
  cfg.W = W;
  cfg.d = d;
  cfg.budget = make_budget(1.0, 1e-4);
  cfg.seed = 42;
  DyadicTree tree = DyadicTree::make(cfg);
  const std::vector<Vector> rows = make_rows(4, d, 512);
  for (std::uint64_t t = 0; t < 2 * W + 3; ++t) {
    tree.tree_ingest(rows[t % rows.size()]);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.tree_query());
  }
}

void BM_SnapshotRoundTrip(benchmark::State& state) {
  SpectralHistogram h = warmed(Mode::jl, static_cast<int>(state.range(0)),
                               static_cast<std::uint64_t>(state.range(1)));
  std::size_t bytes = 0;
  for (auto _ : state) {
    const std::vector<std::uint8_t> snap = h.snapshot();
    bytes = snap.size();
    benchmark::DoNotOptimize(SpectralHistogram::restore(snap));
  }
  state.counters["bytes"] = static_cast<double>(bytes);
}

BENCHMARK(BM_IngestExact)->Args({8, 256})->Args({16, 1024});
BENCHMARK(BM_IngestJl)->Args({8, 256})->Args({16, 1024});
BENCHMARK(BM_IngestWishart)->Args({8, 256})->Args({16, 1024});
BENCHMARK(BM_IngestTree)->Args({8, 256})->Args({16, 1024});
BENCHMARK(BM_QuerySpectral)->Args({8, 256});
BENCHMARK(BM_QueryPca)->Args({8, 256});
BENCHMARK(BM_QueryRegress)->Args({8, 256});
BENCHMARK(BM_TreeQuery)->Args({8, 256});
BENCHMARK(BM_SnapshotRoundTrip)->Args({8, 256});

}  // namespace

BENCHMARK_MAIN();
