#include <benchmark/benchmark.h>

#include "oblivgm/engine.hpp"
#include "oblivgm/fss.hpp"
#include "oblivgm/party.hpp"
#include "oblivgm/shuffle.hpp"

namespace oblivgm {
namespace {

Trio session() {
  Prg rng(Block{42, 1});
  std::array<PartyConfig, 3> cfg;
  for (int i = 0; i < 3; ++i) cfg[i] = PartyConfig{i + 1, 1, rng.next_block()};
  return setup_session(cfg);
}

void BM_DpfFullDomain(benchmark::State& state) {
  Prg rng(Block{1, 2});
  const auto n = static_cast<std::uint64_t>(state.range(0));
  auto keys = fss::dpf_gen(n / 3, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fss::full_domain_eval(keys.first, n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_DpfFullDomain)->RangeMultiplier(4)->Range(256, 65536);

void BM_DcfFullDomain(benchmark::State& state) {
  Prg rng(Block{1, 3});
  const auto n = static_cast<std::uint64_t>(state.range(0));
  auto keys = fss::dcf_gen(n / 3, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fss::full_domain_eval(keys.first, n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_DcfFullDomain)->RangeMultiplier(4)->Range(256, 65536);

void BM_AndGate(benchmark::State& state) {
  auto trio = session();
  Prg rng(Block{2, 2});
  const auto len = static_cast<std::size_t>(state.range(0));
  auto x = share(rng.random_bits(len), rng);
  auto y = share(rng.random_bits(len), rng);
  for (auto _ : state) {
    run_trio(trio, [&](Party& p) { return p.and_gate(x[p.index() - 1], y[p.index() - 1]); });
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(len / 8));
}
BENCHMARK(BM_AndGate)->RangeMultiplier(16)->Range(64, 1 << 16)->UseRealTime();

void BM_Shuffle(benchmark::State& state) {
  auto trio = session();
  Prg rng(Block{3, 3});
  const auto rows = static_cast<std::size_t>(state.range(0));
  std::array<MatchTable, 3> tables;
  for (std::size_t r = 0; r < rows; ++r) {
    auto sh = share(rng.random_bits(256), rng);
    for (int i = 0; i < 3; ++i) tables[i].rows.push_back(sh[i]);
  }
  for (auto _ : state) {
    run_trio(trio, [&](Party& p) { return sec_shuffle(p, tables[p.index() - 1]); });
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_Shuffle)->RangeMultiplier(8)->Range(8, 4096)->UseRealTime();

void BM_SecEvalInterval(benchmark::State& state) {
  auto trio = session();
  Prg rng(Block{4, 4});
  const std::uint64_t n = 256;
  const auto candidates = static_cast<std::size_t>(state.range(0));
  std::array<std::vector<SharedBitVector>, 3> attrs;
  for (std::size_t c = 0; c < candidates; ++c) {
    auto sh = share(BitVector::one_hot(n, rng.uniform(n)), rng);
    for (int i = 0; i < 3; ++i) attrs[i].push_back(sh[i]);
  }
  auto parts = split_bundle(fss::gen_bundle(PredicateSpec::interval(30, 90), n, rng), 0, n);
  for (auto _ : state) {
    run_trio(trio, [&](Party& p) {
      std::vector<const SharedBitVector*> ptrs;
      for (const auto& a : attrs[p.index() - 1]) ptrs.push_back(&a);
      return sec_eval(p, ptrs, parts[p.index() - 1]);
    });
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(candidates));
}
BENCHMARK(BM_SecEvalInterval)->RangeMultiplier(8)->Range(8, 4096)->UseRealTime();

}  // namespace
}  // namespace oblivgm

BENCHMARK_MAIN();
