#include <benchmark/benchmark.h>

#include "atdecor/corpus.hpp"
#include "atdecor/relax.hpp"
#include "atdecor/solver.hpp"

namespace {

using namespace atdecor;

const CorpusEntry& atm() {
  static const CorpusEntry entry = load_corpus("atm");
  return entry;
}

// Hard predicates plus historical data only: satisfiable, so this times the
// multi-start search rather than contraction.
void BM_SolveFeasible(benchmark::State& state) {
  const CorpusEntry& e = atm();
  ConstraintSet cs = e.historical_only();
  SolveOptions options;
  options.restarts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(e.tree, e.domain, cs, options));
}
BENCHMARK(BM_SolveFeasible)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SolveInfeasible(benchmark::State& state) {
  const CorpusEntry& e = atm();
  const ConstraintSet cs = e.constraints();
  for (auto _ : state) benchmark::DoNotOptimize(solve(e.tree, e.domain, cs));
}
BENCHMARK(BM_SolveInfeasible)->Unit(benchmark::kMicrosecond);

void BM_ReplayCertificate(benchmark::State& state) {
  const CorpusEntry& e = atm();
  const ConstraintSet cs = e.constraints();
  const SolveOutcome outcome = solve(e.tree, e.domain, cs);
  if (!outcome.certificate) {
    state.SkipWithError("no certificate");
    return;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(replay_certificate(e.tree, e.domain, cs, *outcome.certificate));
  }
}
BENCHMARK(BM_ReplayCertificate)->Unit(benchmark::kMicrosecond);

void BM_MaxWeak(benchmark::State& state) {
  const CorpusEntry& e = atm();
  const ConstraintSet cs = e.constraints();
  for (auto _ : state) benchmark::DoNotOptimize(relax_maxweak(e.tree, e.domain, cs));
}
BENCHMARK(BM_MaxWeak)->Unit(benchmark::kMillisecond);

void BM_InclusionExact(benchmark::State& state) {
  const CorpusEntry& e = atm();
  const ConstraintSet cs = e.constraints();
  for (auto _ : state) benchmark::DoNotOptimize(relax_inclusion_exact(e.tree, e.domain, cs));
}
BENCHMARK(BM_InclusionExact)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
