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

#ifndef GGMC_TRAINER_HPP
#define GGMC_TRAINER_HPP

#include <functional>
#include <optional>
#include <vector>

#include "ggmc/common.hpp"
#include "ggmc/grid.hpp"
#include "ggmc/objective.hpp"

namespace ggmc {

struct TrainConfig {
  double rho = 1e3;
  double lambda = 1e-9;
  Index rank = 5;
  int p = 4;
  int q = 4;
  double a = 5e-4;
  double b = 5e-7;
  std::size_t maxIters = 400000;
  std::size_t evalEvery = 1000;
  double tol = 1e-6;
  std::uint64_t seed = 42;
  // Unset means 1/sqrt(rank).
  std::optional<double> initScale;

  double effectiveInitScale() const;
  // Throws InvalidArgument naming the first violated bound.
  void validate() const;
};

struct CostSample {
  std::size_t iteration = 0;
  double cost = 0.0;

  friend bool operator==(const CostSample&, const CostSample&) = default;
};

struct TrainReport {
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<CostSample> costTrace;
  FactorState finalState;
};

// Called after every logged evaluation with the iteration count, the
// training cost and a read-only view of the factors.
using EvalObserver = std::function<void(std::size_t iteration, double cost, const FactorState& state)>;

// Relative-change stopping rule shared by the sequential trainer and the
// gossip simulation. Converged once |prev - now| / max(prev, 1e-12) < tol
// for three consecutive evaluations; a non-finite cost or one above 1e3
// times the first observed cost throws DivergenceError.
class ConvergenceMonitor {
 public:
  static constexpr int kRequiredStreak = 3;
  static constexpr double kDivergenceFactor = 1e3;
  static constexpr double kEpsilon = 1e-12;

  explicit ConvergenceMonitor(double tol) : tol_(tol) {}

  // Returns true once the convergence condition holds.
  bool observe(std::size_t iteration, double cost);
  bool converged() const noexcept { return streak_ >= kRequiredStreak; }

 private:
  double tol_;
  std::optional<double> initial_;
  std::optional<double> previous_;
  int streak_ = 0;
};

// Every factor entry i.i.d. uniform on [-initScale, initScale], blocks in
// row-major order, U before W. initScale == 0 gives zeros.
FactorState initFactors(const GridSpec& grid, Index rank, double initScale, Rng& rng);

// gamma_t = a / (1 + b t)
inline double stepSize(std::size_t t, double a, double b) noexcept {
  return a / (1.0 + b * static_cast<double>(t));
}

// pair -= gamma * grad. Throws DivergenceError if grad has a non-finite entry.
void applyGradient(FactorPair& pair, const FactorPair& grad, double gamma);

// One SGD step on the three members of `s` with an explicit step size.
void updateThroughSGD(FactorState& state, const Structure& s, const PartitionedData& data, double rho,
                      double lambda, const NormalizationTable& norm, double gamma);
// Same, with gamma = stepSize(t, config.a, config.b).
void updateThroughSGD(FactorState& state, const Structure& s, const PartitionedData& data,
                      const TrainConfig& config, const NormalizationTable& norm, std::size_t t);

// Sequential sampling loop. The cost is logged at iteration 0, at every
// multiple of evalEvery and after the final update. Pure in (data, config).
TrainReport train(const PartitionedData& data, const TrainConfig& config, const EvalObserver& observer = {});

struct GlobalFactors {
  Matrix u;  // m x r
  Matrix w;  // n x r
};

// Global U row-block i is the mean over j of U_ij; W row-block j is the
// mean over i of W_ij.
GlobalFactors assembleGlobalFactors(const FactorState& state);

double predict(const Matrix& u, const Matrix& w, Index row, Index col);
inline double predict(const GlobalFactors& f, Index row, Index col) { return predict(f.u, f.w, row, col); }

}  // namespace ggmc

#endif  // GGMC_TRAINER_HPP
