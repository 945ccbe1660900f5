#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "specmon/archive.hpp"
#include "specmon/measure.hpp"

using namespace specmon;
namespace fs = std::filesystem;

namespace {

Sweep make_sweep(std::size_t n_bins, Hz spacing, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(-100.0, 1.5);
  Sweep s;
  s.site_id = "bench";
  s.bins.reserve(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) s.bins.push_back(Bin{static_cast<Hz>(i) * spacing, noise(rng)});
  return s;
}

void BM_SweepOccupancy(benchmark::State& state) {
  const auto n_bins = static_cast<std::size_t>(state.range(0));
  const Hz spacing = 1'000'000;
  std::mt19937_64 rng(1);
  const auto sweep = make_sweep(n_bins, spacing, rng);
  const auto grid = build_channel_grid(0, static_cast<Hz>(n_bins) * spacing);
  for (auto _ : state) benchmark::DoNotOptimize(sweep_occupancy(sweep, grid, -97.0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n_bins));
}
BENCHMARK(BM_SweepOccupancy)->Arg(20)->Arg(1000)->Arg(20000);

void BM_ComputeAuHour(benchmark::State& state) {
  const auto sweep_time_s = static_cast<double>(state.range(0));
  const auto grid = build_channel_grid(0, 100'000'000);
  const Timestamp hour = from_unix_us(1'704'067'200'000'000);
  std::mt19937_64 rng(2);
  std::bernoulli_distribution occ(0.3);
  std::vector<TimedOccupancy> stream;
  std::vector<MinuteManifest> manifests;
  const auto step = Micros{static_cast<std::int64_t>(sweep_time_s * 1e6)};
  for (int m = 0; m < 60; ++m) manifests.push_back(MinuteManifest{hour + m * kMinute, 0, 0});
  for (auto t = hour; t < hour + kHour; t += step) {
    TimedOccupancy o{t, Occupancy(grid.size())};
    for (std::size_t c = 0; c < grid.size(); ++c) o.channels[c] = occ(rng);
    stream.push_back(std::move(o));
    auto& mf = manifests[static_cast<std::size_t>((t - hour) / kMinute)];
    ++mf.total_sweeps;
    ++mf.stored_sweeps;
  }
  AuContext ctx;
  ctx.site_id = "bench";
  ctx.hour_start = hour;
  ctx.grid = grid;
  ctx.sweep_time_s = sweep_time_s;
  ctx.gate_threshold_dbm = -100.0;
  ctx.analysis_threshold_dbm = -85.0;
  for (auto _ : state) benchmark::DoNotOptimize(compute_au(stream, manifests, ctx));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.size()));
}
BENCHMARK(BM_ComputeAuHour)->Arg(1)->Arg(10);

void BM_CompressDay(benchmark::State& state) {
  const auto root = fs::temp_directory_path() / ("specmon-bench-" + std::to_string(::getpid()));
  const auto dir = root / "20240101";
  fs::create_directories(dir);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(-100.0, 1.5);
  std::size_t bytes = 0;
  for (int m = 0; m < 60; ++m) {
    std::ofstream out(dir / ("minute-" + std::to_string(m) + ".sweeps"));
    for (int s = 0; s < 6; ++s) {
      for (int b = 0; b < 20; ++b) out << b * 1000000 << "," << noise(rng) << "\n";
    }
    bytes += static_cast<std::size_t>(out.tellp());
  }
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compress_dir(dir, root / "out.tar.xz", level));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes));
  fs::remove_all(root);
}
BENCHMARK(BM_CompressDay)->Arg(1)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
