#include <benchmark/benchmark.h>

#include "qrng/coincidence.hpp"
#include "qrng/gf2_poly.hpp"
#include "qrng/rng.hpp"
#include "qrng/spdcsim.hpp"
#include "qrng/toeplitz.hpp"

namespace {

qrng::BitBuffer random_bits(std::size_t n, std::uint64_t seed) {
  qrng::Rng rng(seed);
  std::vector<std::uint64_t> w((n + 63) / 64);
  for (auto& x : w) x = rng.next_u64();
  return qrng::BitBuffer::from_words(std::move(w), n);
}

// One extractor block, single thread. Items are output bits.
void BM_ToeplitzExtract(benchmark::State& state) {
  qrng::ExtractorConfig cfg;
  cfg.block_bits = static_cast<std::size_t>(state.range(0));
  cfg.ratio = 0.95;
  cfg.seed_key = 7;
  const auto raw = random_bits(cfg.block_bits * 4, 1);
  std::size_t out = 0;
  for (auto _ : state) {
    auto bits = qrng::extract(raw, cfg, 1);
    out += bits.size();
    benchmark::DoNotOptimize(bits);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(out));
  state.counters["input_bits_per_second"] =
      benchmark::Counter(static_cast<double>(raw.size()) * state.iterations(), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ToeplitzExtract)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_Gf2Multiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_bits(n, 2);
  const auto b = random_bits(n, 3);
  const auto backend = state.range(1) ? qrng::ClmulBackend::hardware : qrng::ClmulBackend::software;
  if (backend == qrng::ClmulBackend::hardware && !qrng::clmul_hardware_available()) {
    state.SkipWithError("no pclmul");
    return;
  }
  for (auto _ : state) benchmark::DoNotOptimize(qrng::gf2_multiply(a.words(), b.words(), backend));
  state.SetItemsProcessed(static_cast<std::int64_t>(n) * state.iterations());
}
BENCHMARK(BM_Gf2Multiply)->Args({1'000'000, 0})->Args({1'000'000, 1})->Unit(benchmark::kMillisecond);

// Items are input tags over all four channels.
void BM_FindCoincidences(benchmark::State& state) {
  qrng::SimConfig sim;
  sim.pump_power_mw = 17.0;
  sim.duration_s = 0.05;
  const auto tags = qrng::simulate(sim);
  const qrng::CoincidenceWindow w;
  for (auto _ : state) benchmark::DoNotOptimize(qrng::find_coincidences(tags, w));
  state.SetItemsProcessed(static_cast<std::int64_t>(tags.total_tags()) * state.iterations());
}
BENCHMARK(BM_FindCoincidences)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
