/* Copyright 2026 The NCS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include "ncs/arch_model.hpp"
#include "ncs/candidate_pool.hpp"
#include "ncs/cost_model.hpp"
#include "ncs/eval_gateway.hpp"
#include "ncs/scaling_rules.hpp"
#include "ncs/tournament.hpp"

namespace {

ncs::ScalingLadder b0_ladder() {
  std::vector<int> r;
  for (const auto& s : ncs::baseline_b0().stages) r.push_back(s.repeats);
  return ncs::derive_ladder(r, 4);
}

void BM_CostBaseline(benchmark::State& state) {
  const auto b0 = ncs::baseline_b0();
  for (auto _ : state) benchmark::DoNotOptimize(ncs::cost(b0));
}
BENCHMARK(BM_CostBaseline);

void BM_DeriveLadder(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(b0_ladder());
}
BENCHMARK(BM_DeriveLadder);

void BM_GeneratePool64(benchmark::State& state) {
  const auto ladder = b0_ladder();
  for (auto _ : state) benchmark::DoNotOptimize(ncs::generate_pool(ladder));
}
BENCHMARK(BM_GeneratePool64);

void BM_CostBatch(benchmark::State& state) {
  std::vector<ncs::ArchDescriptor> archs;
  for (const auto& c : ncs::generate_pool(b0_ladder())) archs.push_back(c.arch);
  const auto workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ncs::cost_batch(archs, workers));
}
BENCHMARK(BM_CostBatch)->Arg(1)->Arg(4);

void BM_StandardizeAndGroup(benchmark::State& state) {
  const auto pool = ncs::generate_pool(b0_ladder());
  for (auto _ : state) {
    auto copy = pool;
    ncs::standardize(copy);
    benchmark::DoNotOptimize(ncs::group(copy, 10));
  }
}
BENCHMARK(BM_StandardizeAndGroup);

void BM_SyntheticTournament(benchmark::State& state) {
  auto pool = ncs::generate_pool(b0_ladder());
  ncs::standardize(pool);
  const auto groups = ncs::group(pool, 10);
  const ncs::SyntheticEvaluator evaluator(1);
  ncs::SearchOptions opts;
  opts.parallelism = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ncs::run_search({10, 350, 1, 1}, pool, groups, evaluator, opts));
}
BENCHMARK(BM_SyntheticTournament)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
