// Copyright 2026 The ggmc Authors. All Rights Reserved.
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

#include "ggmc/data_io.hpp"
#include "ggmc/gossip.hpp"

namespace ggmc {
namespace {

// Synthetic 500x500 rank-5 problem with 20% of cells observed, split p x p.
struct Fixture {
  explicit Fixture(int p)
      : data([&] {
          Rng rng(7);
          const SyntheticData syn = generateSynthetic(500, 500, 5, 0.2, 0.0, rng);
          return PartitionedData(makeGrid(500, 500, p, p), syn.dataset.train);
        }()),
        norm(computeNormalization(data.grid())) {
    Rng rng(1);
    state = initFactors(data.grid(), 5, 1.0 / std::sqrt(5.0), rng);
  }
  PartitionedData data;
  NormalizationTable norm;
  FactorState state{data.grid(), 5};
};

void BM_StructureGradient(benchmark::State& bs) {
  const Fixture fx(static_cast<int>(bs.range(0)));
  const Structure s(StructureKind::Upper, {1, 1});
  for (auto _ : bs) benchmark::DoNotOptimize(structureGradient(s, fx.state, fx.data, 1e3, 1e-9, fx.norm));
}
BENCHMARK(BM_StructureGradient)->Arg(2)->Arg(4)->Arg(10);

void BM_UpdateThroughSGD(benchmark::State& bs) {
  Fixture fx(static_cast<int>(bs.range(0)));
  Rng rng(3);
  std::size_t t = 0;
  for (auto _ : bs) {
    const Structure s = sampleStructure(fx.data.grid(), rng);
    updateThroughSGD(fx.state, s, fx.data, 1e3, 1e-9, fx.norm, 1e-6);
    ++t;
  }
  bs.SetItemsProcessed(static_cast<std::int64_t>(t));
}
BENCHMARK(BM_UpdateThroughSGD)->Arg(4)->Arg(10);

void BM_TrainingCost(benchmark::State& bs) {
  const Fixture fx(static_cast<int>(bs.range(0)));
  for (auto _ : bs) benchmark::DoNotOptimize(trainingCost(fx.state, fx.data, 1e-9));
}
BENCHMARK(BM_TrainingCost)->Arg(4);

void BM_GossipRound(benchmark::State& bs) {
  const Fixture fx(static_cast<int>(bs.range(0)));
  GossipNetwork net(fx.data, fx.state);
  const TrainConfig config;
  const std::vector<Structure> all = enumerateStructures(fx.data.grid());
  Rng rng(9);
  std::size_t t = 0;
  for (auto _ : bs) {
    const auto batch = selectNonOverlappingBatch(all, rng);
    net.beginRound(batch);
    for (const Structure& s : batch) executeStructureGossip(net, s, config, fx.norm, t++);
  }
  bs.counters["messages"] = static_cast<double>(net.stats().messagesSent);
  bs.SetItemsProcessed(static_cast<std::int64_t>(t));
}
BENCHMARK(BM_GossipRound)->Arg(4)->Arg(10);

void BM_SelectBatch(benchmark::State& bs) {
  const std::vector<Structure> all = enumerateStructures(makeGrid(100, 100, static_cast<int>(bs.range(0)),
                                                                  static_cast<int>(bs.range(0))));
  Rng rng(2);
  for (auto _ : bs) benchmark::DoNotOptimize(selectNonOverlappingBatch(all, rng));
}
BENCHMARK(BM_SelectBatch)->Arg(4)->Arg(10)->Arg(20);

}  // namespace
}  // namespace ggmc

BENCHMARK_MAIN();
