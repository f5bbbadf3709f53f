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

#include "ggmc/trainer.hpp"

#include <cmath>
#include <string>

namespace ggmc {

double TrainConfig::effectiveInitScale() const {
  return initScale.value_or(1.0 / std::sqrt(static_cast<double>(rank)));
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw InvalidArgument(msg);
  };
  require(rho >= 0.0 && std::isfinite(rho), "rho must be >= 0");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be >= 0");
  require(rank >= 1, "rank must be >= 1");
  require(p >= 2 && q >= 2, "grid must be at least 2x2");
  require(a > 0.0 && std::isfinite(a), "a must be > 0");
  require(b >= 0.0 && std::isfinite(b), "b must be >= 0");
  require(maxIters >= 1, "max_iters must be >= 1");
  require(evalEvery >= 1, "eval_every must be >= 1");
  require(tol > 0.0, "tol must be > 0");
  require(effectiveInitScale() > 0.0, "init_scale must be > 0");
}

bool ConvergenceMonitor::observe(std::size_t iteration, double cost) {
  if (!std::isfinite(cost)) {
    throw DivergenceError("non-finite training cost at iteration " + std::to_string(iteration));
  }
  if (!initial_) initial_ = cost;
  if (cost > kDivergenceFactor * *initial_ && cost > 0.0) {
    throw DivergenceError("training cost " + std::to_string(cost) + " at iteration " + std::to_string(iteration) +
                          " exceeds 1e3 x initial cost " + std::to_string(*initial_));
  }
  if (previous_) {
    const double change = std::abs(*previous_ - cost) / std::max(*previous_, kEpsilon);
    streak_ = change < tol_ ? streak_ + 1 : 0;
  }
  previous_ = cost;
  return converged();
}

FactorState initFactors(const GridSpec& grid, Index rank, double initScale, Rng& rng) {
  FactorState state(grid, rank);
  if (initScale == 0.0) return state;
  if (!(initScale > 0.0)) throw InvalidArgument("init scale must be >= 0");
  std::uniform_real_distribution<double> dist(-initScale, initScale);
  for (FactorPair& pair : state.pairs()) {
    for (Index k = 0; k < pair.u.size(); ++k) pair.u.data()[k] = dist(rng);
    for (Index k = 0; k < pair.w.size(); ++k) pair.w.data()[k] = dist(rng);
  }
  return state;
}

void applyGradient(FactorPair& pair, const FactorPair& grad, double gamma) {
  if (!grad.u.allFinite() || !grad.w.allFinite()) throw DivergenceError("non-finite gradient");
  pair.u -= gamma * grad.u;
  pair.w -= gamma * grad.w;
}

void updateThroughSGD(FactorState& state, const Structure& s, const PartitionedData& data, double rho,
                      double lambda, const NormalizationTable& norm, double gamma) {
  const StructureGradient g = structureGradient(s, state, data, rho, lambda, norm);
  for (std::size_t k = 0; k < 3; ++k) applyGradient(state.at(s.members()[k]), g.members[k], gamma);
}

void updateThroughSGD(FactorState& state, const Structure& s, const PartitionedData& data,
                      const TrainConfig& config, const NormalizationTable& norm, std::size_t t) {
  updateThroughSGD(state, s, data, config.rho, config.lambda, norm, stepSize(t, config.a, config.b));
}

TrainReport train(const PartitionedData& data, const TrainConfig& config, const EvalObserver& observer) {
  config.validate();
  const GridSpec& grid = data.grid();
  if (grid.p() != config.p || grid.q() != config.q) {
    throw InvalidArgument("data is partitioned " + std::to_string(grid.p()) + "x" + std::to_string(grid.q()) +
                          " but the config asks for " + std::to_string(config.p) + "x" + std::to_string(config.q));
  }

  Rng rng(config.seed);
  TrainReport report;
  report.finalState = initFactors(grid, config.rank, config.effectiveInitScale(), rng);
  const NormalizationTable norm = computeNormalization(grid);
  ConvergenceMonitor monitor(config.tol);

  auto record = [&](std::size_t iteration) {
    const double cost = trainingCost(report.finalState, data, config.lambda);
    report.costTrace.push_back({iteration, cost});
    if (observer) observer(iteration, cost, report.finalState);
    return monitor.observe(iteration, cost);
  };

  record(0);
  for (std::size_t t = 0; t < config.maxIters; ++t) {
    const Structure s = sampleStructure(grid, rng);
    updateThroughSGD(report.finalState, s, data, config, norm, t);
    report.iterations = t + 1;
    if (report.iterations % config.evalEvery == 0 || report.iterations == config.maxIters) {
      if (record(report.iterations)) {
        report.converged = true;
        break;
      }
    }
  }
  return report;
}

GlobalFactors assembleGlobalFactors(const FactorState& state) {
  const GridSpec& grid = state.grid();
  GlobalFactors out{Matrix::Zero(grid.m(), state.rank()), Matrix::Zero(grid.n(), state.rank())};
  for (int i = 1; i <= grid.p(); ++i) {
    const Range& rows = grid.rowRange(i);
    auto block = out.u.middleRows(rows.begin, rows.size());
    // running mean, exact when all copies agree
    for (int j = 1; j <= grid.q(); ++j) block += (state.at({i, j}).u - block) / static_cast<double>(j);
  }
  for (int j = 1; j <= grid.q(); ++j) {
    const Range& cols = grid.colRange(j);
    auto block = out.w.middleRows(cols.begin, cols.size());
    for (int i = 1; i <= grid.p(); ++i) block += (state.at({i, j}).w - block) / static_cast<double>(i);
  }
  return out;
}

double predict(const Matrix& u, const Matrix& w, Index row, Index col) {
  if (row < 0 || row >= u.rows() || col < 0 || col >= w.rows()) {
    throw InvalidArgument("prediction index (" + std::to_string(row) + "," + std::to_string(col) +
                          ") out of range");
  }
  return u.row(row).dot(w.row(col));
}

}  // namespace ggmc
