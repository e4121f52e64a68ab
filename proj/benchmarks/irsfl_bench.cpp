// Copyright 2026 The irsfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <benchmark/benchmark.h>

#include <memory>

#include "irsfl/aircomp.hpp"
#include "irsfl/channel_model.hpp"
#include "irsfl/dc_programs.hpp"
#include "irsfl/fl_sim.hpp"
#include "irsfl/sdp_engine.hpp"
#include "irsfl/selection.hpp"

namespace irsfl {
namespace {

ChannelSet desk_channels(int m, int n, int k, std::uint64_t seed) {
  return sample_channels(Geometry::reference(k), FadingConfig::reference(), m, n, seed);
}

CMatrix random_hermitian(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0xB0});
  CMatrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = complex_normal(rng);
  return 0.5 * (b + b.adjoint());
}

void BM_PsdProject(benchmark::State& state) {
  const CMatrix a = random_hermitian(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sdp::psd_project(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PsdProject)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_AggregationMse(benchmark::State& state) {
  auto ch = std::make_shared<const ChannelSet>(desk_channels(8, 16, 10, 2));
  const AircompInstance inst(ch, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 0.1, 1e-12);
  const Beamformer m(CVector::Ones(8));
  const PhaseVector v = PhaseVector::ones(16);
  for (auto _ : state) benchmark::DoNotOptimize(aggregation_mse(inst, m, v));
}
BENCHMARK(BM_AggregationMse);

// One beamformer DC solve over |S| devices (M = 8, N = 16).
void BM_DcBeamformer(benchmark::State& state) {
  const ChannelSet ch =
      normalize_channels(desk_channels(8, 16, 10, 3), 0.1, 1e-12);
  DeviceSet s;
  for (int i = 0; i < state.range(0); ++i) s.push_back(i);
  const PhaseVector v = PhaseVector::ones(16);
  for (auto _ : state)
    benchmark::DoNotOptimize(dc_solve_p21(ch, v, s, DcConfig{}, sdp::SolverConfig{}));
}
BENCHMARK(BM_DcBeamformer)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

// One phase DC solve: lifted dimension N + 1.
void BM_DcPhases(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ChannelSet ch = normalize_channels(desk_channels(8, n, 10, 4), 0.1, 1e-12);
  const Beamformer m(CVector::Ones(8));
  for (auto _ : state)
    benchmark::DoNotOptimize(dc_solve_p22(ch, m, {0, 1, 2, 3, 4}, DcConfig{}, sdp::SolverConfig{}));
}
BENCHMARK(BM_DcPhases)->Arg(4)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SelectDevices(benchmark::State& state) {
  const ChannelSet ch = desk_channels(8, 16, 10, 5);
  SelectionConfig cfg;
  cfg.gamma = db_to_linear(-15.0);
  cfg.baseline = static_cast<Scheme>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(select_devices(ch, cfg, 0));
  state.SetLabel(to_string(cfg.baseline));
}
BENCHMARK(BM_SelectDevices)->DenseRange(0, 3)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_FlRound(benchmark::State& state) {
  const FlTask task = make_task(10, 20, 10, 50, true, 0);
  FlRoundConfig cfg;
  cfg.rounds = 1;
  cfg.selected = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  cfg.error = ErrorModel::fixed_gaussian(0.05);
  for (auto _ : state) benchmark::DoNotOptimize(run_fl(task, cfg, 0));
}
BENCHMARK(BM_FlRound)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace irsfl

BENCHMARK_MAIN();
