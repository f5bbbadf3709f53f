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

#include <gtest/gtest.h>

#include <cmath>

#include "ggmc/data_io.hpp"
#include "ggmc/trainer.hpp"
#include "support/oracles.hpp"

namespace ggmc {
namespace {

TEST(StepSize, Schedule) {
  EXPECT_EQ(stepSize(0, 5e-4, 5e-7), 5e-4);
  EXPECT_DOUBLE_EQ(stepSize(2000000, 5e-4, 5e-7), 2.5e-4);
  for (std::size_t t : {0u, 10u, 1000000u}) EXPECT_EQ(stepSize(t, 0.3, 0.0), 0.3);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_DOUBLE_EQ(c.effectiveInitScale(), 1.0 / std::sqrt(5.0));
  auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), InvalidArgument);
  };
  bad([](TrainConfig& c) { c.rho = -1; });
  bad([](TrainConfig& c) { c.lambda = -1e-9; });
  bad([](TrainConfig& c) { c.rank = 0; });
  bad([](TrainConfig& c) { c.a = 0; });
  bad([](TrainConfig& c) { c.b = -1; });
  bad([](TrainConfig& c) { c.maxIters = 0; });
  bad([](TrainConfig& c) { c.evalEvery = 0; });
  bad([](TrainConfig& c) { c.tol = 0; });
  bad([](TrainConfig& c) { c.initScale = 0.0; });
  bad([](TrainConfig& c) { c.p = 1; });
}

TEST(InitFactors, ZeroScaleGivesZeros) {
  Rng rng(1);
  const FactorState s = initFactors(makeGrid(10, 10, 2, 2), 3, 0.0, rng);
  for (const FactorPair& f : s.pairs()) {
    EXPECT_EQ(f.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.w.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(InitFactors, DeterministicAndBounded) {
  Rng a(3), b(3);
  const GridSpec g = makeGrid(20, 30, 2, 3);
  const FactorState x = initFactors(g, 4, 0.5, a);
  const FactorState y = initFactors(g, 4, 0.5, b);
  EXPECT_TRUE(x == y);
  for (const FactorPair& f : x.pairs()) {
    EXPECT_LE(f.u.cwiseAbs().maxCoeff(), 0.5);
    EXPECT_LE(f.w.cwiseAbs().maxCoeff(), 0.5);
  }
}

TEST(InitFactors, ShapesForExperimentGrid) {
  Rng rng(0);
  const FactorState s = initFactors(makeGrid(500, 500, 4, 4), 5, 0.4, rng);
  ASSERT_EQ(s.pairs().size(), 16u);
  for (const FactorPair& f : s.pairs()) {
    EXPECT_EQ(f.u.rows(), 125);
    EXPECT_EQ(f.u.cols(), 5);
    EXPECT_EQ(f.w.rows(), 125);
    EXPECT_EQ(f.w.cols(), 5);
  }
}

// 2x2 grid of 1x1 blocks, rank 1, rho = 1, lambda = 0. Gradient worked out
// by hand for Upper(1,1):
//   (1,1): r = 1 - 0.5*1 = 0.5, cf = 1, dU and dW coefficients 1
//          gU = -2*0.5*1 + 2*(0.5-0.25) = -0.5
//          gW = -2*0.5*0.5 + 2*(1-0.5) = 0.5
//   (2,1): r = 3 - 1*0.5 = 2.5, cf = 0.5
//          gU = -2*0.5*2.5*0.5 = -1.25;  gW = -2*0.5*2.5*1 - 2*(1-0.5) = -3.5
//   (1,2): r = 2 - 0.25*2 = 1.5, cf = 0.5
//          gU = -2*0.5*1.5*2 - 2*(0.5-0.25) = -3.5;  gW = -2*0.5*1.5*0.25 = -0.375
TEST(UpdateThroughSGD, ScalarBlocksMatchHandArithmetic) {
  const GridSpec g = makeGrid(2, 2, 2, 2);
  const PartitionedData d(g, std::vector<RatingTriple>{{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}, {1, 1, 4.0}});
  FactorState st(g, 1);
  st.at({1, 1}) = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0)};
  st.at({2, 1}) = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.5)};
  st.at({1, 2}) = {Matrix::Constant(1, 1, 0.25), Matrix::Constant(1, 1, 2.0)};
  st.at({2, 2}) = {Matrix::Constant(1, 1, 7.0), Matrix::Constant(1, 1, -7.0)};
  updateThroughSGD(st, Structure(StructureKind::Upper, {1, 1}), d, 1.0, 0.0, computeNormalization(g), 0.1);
  EXPECT_NEAR(st.at({1, 1}).u(0, 0), 0.55, 1e-15);
  EXPECT_NEAR(st.at({1, 1}).w(0, 0), 0.95, 1e-15);
  EXPECT_NEAR(st.at({2, 1}).u(0, 0), 1.125, 1e-15);
  EXPECT_NEAR(st.at({2, 1}).w(0, 0), 0.85, 1e-15);
  EXPECT_NEAR(st.at({1, 2}).u(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(st.at({1, 2}).w(0, 0), 2.0375, 1e-15);
  EXPECT_EQ(st.at({2, 2}).u(0, 0), 7.0);
  EXPECT_EQ(st.at({2, 2}).w(0, 0), -7.0);
}

TEST(UpdateThroughSGD, ZeroStepOrZeroGradientLeavesStateUnchanged) {
  const auto inst = oracle::randomInstance(6, 9, 9, 3, 3, 2, 5);
  const auto norm = computeNormalization(inst.grid);
  FactorState st = inst.state;
  for (const Structure& s : enumerateStructures(inst.grid)) updateThroughSGD(st, s, inst.data, 1.0, 0.1, norm, 0.0);
  EXPECT_TRUE(st == inst.state);

  const GridSpec g = makeGrid(4, 4, 2, 2);
  FactorState zero(g, 2);
  const PartitionedData noData(g, std::vector<RatingTriple>{});
  FactorState copy = zero;
  updateThroughSGD(copy, Structure(StructureKind::Lower, {2, 2}), noData, 5.0, 1.0, computeNormalization(g), 0.3);
  EXPECT_TRUE(copy == zero);
}

TEST(UpdateThroughSGD, OnlyMembersMove) {
  const auto inst = oracle::randomInstance(12, 12, 12, 3, 3, 2, 6);
  FactorState st = inst.state;
  const Structure s(StructureKind::Upper, {2, 2});
  updateThroughSGD(st, s, inst.data, 1.0, 0.01, computeNormalization(inst.grid), 0.01);
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) {
      const bool same = st.at({i, j}).u == inst.state.at({i, j}).u && st.at({i, j}).w == inst.state.at({i, j}).w;
      EXPECT_EQ(same, !s.contains({i, j})) << i << "," << j;
    }
  }
}

TEST(UpdateThroughSGD, NonFiniteGradientAborts) {
  const GridSpec g = makeGrid(2, 2, 2, 2);
  const PartitionedData d(g, std::vector<RatingTriple>{{0, 0, 1.0}});
  FactorState st(g, 1);
  st.at({1, 1}).u(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(updateThroughSGD(st, Structure(StructureKind::Upper, {1, 1}), d, 1.0, 0.0, computeNormalization(g), 0.1),
               DivergenceError);
}

// Small enough steps strictly decrease the sampled structure's objective.
TEST(UpdateThroughSGD, SmallStepDescends) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = oracle::randomInstance(seed, 9, 9, 3, 3, 2, 5);
    const auto norm = computeNormalization(inst.grid);
    const auto all = enumerateStructures(inst.grid);
    const Structure& s = all[seed % all.size()];
    const double before = structureObjective(s, operandsOf(s, inst.state, inst.data), 2.0, 0.1, norm);
    // Backtrack from 1e-2 until the step descends; a descent direction must
    // find one well before 1e-8.
    bool descended = false;
    for (double gamma = 1e-2; gamma > 1e-8 && !descended; gamma /= 2) {
      FactorState st = inst.state;
      updateThroughSGD(st, s, inst.data, 2.0, 0.1, norm, gamma);
      descended = structureObjective(s, operandsOf(s, st, inst.data), 2.0, 0.1, norm) < before;
    }
    EXPECT_TRUE(descended) << "seed " << seed;
  }
}

PartitionedData syntheticData(std::uint64_t seed, Index m, Index n, Index rank, int p, int q, Dataset* out = nullptr) {
  Rng rng(seed);
  SyntheticData syn = generateSynthetic(m, n, rank, 0.3, 0.05, rng);
  if (out) *out = syn.dataset;
  return PartitionedData(makeGrid(m, n, p, q), syn.dataset.train);
}

TEST(Train, SingleIteration) {
  const PartitionedData d = syntheticData(1, 40, 40, 2, 2, 2);
  TrainConfig c;
  c.p = c.q = 2;
  c.rank = 2;
  c.maxIters = 1;
  const TrainReport r = train(d, c);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_FALSE(r.converged);
  ASSERT_EQ(r.costTrace.size(), 2u);
  EXPECT_EQ(r.costTrace[0].iteration, 0u);
  EXPECT_EQ(r.costTrace[1].iteration, 1u);
}

TEST(Train, DeterministicGivenSeed) {
  const PartitionedData d = syntheticData(2, 60, 60, 3, 3, 3);
  TrainConfig c;
  c.p = c.q = 3;
  c.rank = 3;
  c.maxIters = 3000;
  c.evalEvery = 500;
  const TrainReport a = train(d, c);
  const TrainReport b = train(d, c);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.costTrace, b.costTrace);
  EXPECT_TRUE(a.finalState == b.finalState);
  c.seed += 1;
  EXPECT_FALSE(train(d, c).finalState == a.finalState);
}

TEST(Train, RejectsGridMismatch) {
  const PartitionedData d = syntheticData(3, 40, 40, 2, 2, 2);
  TrainConfig c;  // 4x4 default
  EXPECT_THROW(train(d, c), InvalidArgument);
}

TEST(Train, TraceIsStrictlyIncreasingAndBounded) {
  const PartitionedData d = syntheticData(4, 60, 60, 2, 3, 3);
  TrainConfig c;
  c.p = c.q = 3;
  c.rank = 2;
  c.maxIters = 2500;
  c.evalEvery = 1000;
  const TrainReport r = train(d, c);
  std::vector<std::size_t> its;
  for (const CostSample& s : r.costTrace) its.push_back(s.iteration);
  EXPECT_EQ(its, (std::vector<std::size_t>{0, 1000, 2000, 2500}));
  EXPECT_LE(r.iterations, c.maxIters);
}

TEST(Train, DivergenceIsReported) {
  // On a 2x2 grid every consensus coefficient is 1, so gamma*4*rho = 4 is
  // unstable.
  const PartitionedData d = syntheticData(5, 40, 40, 2, 2, 2);
  TrainConfig c;
  c.p = c.q = 2;
  c.rank = 2;
  c.a = 1e-3;
  c.maxIters = 100000;
  c.evalEvery = 100;
  EXPECT_THROW(train(d, c), DivergenceError);
}

TEST(Train, ConvergesOnSmallSyntheticProblem) {
  Dataset ds;
  const PartitionedData d = syntheticData(6, 120, 120, 3, 3, 3, &ds);
  TrainConfig c;
  c.p = c.q = 3;
  c.rank = 3;
  c.a = 2e-3;
  c.b = 0.0;
  c.rho = 100.0;
  c.maxIters = 200000;
  const TrainReport r = train(d, c);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.costTrace.back().cost, 1e-5 * r.costTrace.front().cost);
  EXPECT_LT(rmse(ds.test, assembleGlobalFactors(r.finalState)), 1e-2);
}

TEST(ConvergenceMonitorTest, NeedsThreeQuietEvaluations) {
  ConvergenceMonitor m(1e-3);
  EXPECT_FALSE(m.observe(0, 100.0));
  EXPECT_FALSE(m.observe(1, 100.0));
  EXPECT_FALSE(m.observe(2, 100.0));
  EXPECT_FALSE(m.observe(3, 50.0));  // resets the streak
  EXPECT_FALSE(m.observe(4, 50.0));
  EXPECT_FALSE(m.observe(5, 50.0));
  EXPECT_TRUE(m.observe(6, 50.0));
}

TEST(ConvergenceMonitorTest, ExplodingCostThrows) {
  ConvergenceMonitor m(1e-6);
  m.observe(0, 1.0);
  EXPECT_NO_THROW(m.observe(1, 999.0));
  EXPECT_THROW(m.observe(2, 1001.0), DivergenceError);
  ConvergenceMonitor n(1e-6);
  EXPECT_THROW(n.observe(0, std::nan("")), DivergenceError);
}

TEST(Assemble, IdenticalBlocksStack) {
  const GridSpec g = makeGrid(5, 4, 2, 2);
  FactorState st(g, 2);
  for (int i = 1; i <= 2; ++i) {
    const Matrix u = Matrix::Constant(g.rowRange(i).size(), 2, i);
    for (int j = 1; j <= 2; ++j) st.at({i, j}).u = u;
  }
  const GlobalFactors f = assembleGlobalFactors(st);
  EXPECT_EQ(f.u.rows(), 5);
  EXPECT_EQ(f.w.rows(), 4);
  EXPECT_EQ(f.u(0, 0), 1.0);
  EXPECT_EQ(f.u(2, 1), 1.0);
  EXPECT_EQ(f.u(3, 0), 2.0);
  EXPECT_EQ(f.u(4, 1), 2.0);
}

TEST(Assemble, MeanOverGroup) {
  const GridSpec g = makeGrid(4, 4, 2, 2);
  FactorState st(g, 3);
  st.at({1, 2}).u.setConstant(2.0);
  st.at({2, 1}).w.setConstant(4.0);
  const GlobalFactors f = assembleGlobalFactors(st);
  EXPECT_TRUE((f.u.topRows(2).array() == 1.0).all());
  EXPECT_TRUE((f.u.bottomRows(2).array() == 0.0).all());
  EXPECT_TRUE((f.w.topRows(2).array() == 2.0).all());
}

TEST(Predict, DotProduct) {
  EXPECT_EQ(predict(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 3.0), 0, 0), 6.0);
  EXPECT_EQ(predict(Matrix::Zero(3, 2), Matrix::Zero(4, 2), 2, 3), 0.0);
  const Matrix u = Matrix::Random(4, 3), w = Matrix::Random(5, 3);
  const Matrix x = u * w.transpose();
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < 5; ++c) EXPECT_NEAR(predict(u, w, r, c), x(r, c), 1e-15);
  EXPECT_THROW(predict(u, w, 4, 0), InvalidArgument);
  EXPECT_THROW(predict(u, w, 0, -1), InvalidArgument);
}

}  // namespace
}  // namespace ggmc
