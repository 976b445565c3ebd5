// Copyright 2026 The ICDA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial reference kernel against the OpenMP kernel on the same problems.
// Both must return identical counts; the benchmark checks that once per run.

#include <benchmark/benchmark.h>

#include <stdexcept>

#include "icda/selection_kernel.hpp"

namespace {

icda::SelectionProblem problem(const benchmark::State& state) {
  return {0.9, 0.85, static_cast<int>(state.range(0)),
          static_cast<std::uint64_t>(state.range(1)), 42};
}

void BM_Serial(benchmark::State& state) {
  const auto p = problem(state);
  for (auto _ : state) benchmark::DoNotOptimize(icda::count_x2_selections_serial(p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.trials));
}

void BM_Parallel(benchmark::State& state) {
  const auto p = problem(state);
  if (icda::count_x2_selections_parallel(p) != icda::count_x2_selections_serial(p)) {
    state.SkipWithError("parallel and serial counts differ");
    return;
  }
  for (auto _ : state) benchmark::DoNotOptimize(icda::count_x2_selections_parallel(p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.trials));
}

}  // namespace

BENCHMARK(BM_Serial)->Args({10, 60'000})->Args({35, 60'000})->Args({35, 600'000});
BENCHMARK(BM_Parallel)->Args({10, 60'000})->Args({35, 60'000})->Args({35, 600'000});

BENCHMARK_MAIN();
