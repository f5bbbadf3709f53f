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

// Test-only reference computations. Nothing here calls the cost, gradient,
// enumeration or normalisation code under test; they are rebuilt from the
// membership rules with plain loops.
#ifndef GGMC_TESTS_ORACLES_HPP
#define GGMC_TESTS_ORACLES_HPP

#include <functional>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "ggmc/common.hpp"
#include "ggmc/grid.hpp"
#include "ggmc/objective.hpp"

namespace ggmc::oracle {

// (kind, pivot i, pivot j) with kind 0 = Upper, 1 = Lower.
using Pivot = std::tuple<int, int, int>;

struct Cell {
  int i;
  int j;
  auto operator<=>(const Cell&) const = default;
};

// The three cells of the structure plus which pairs carry the consensus
// terms: uPair (same grid row), wPair (same grid column).
struct Roles {
  std::vector<Cell> cells;
  std::pair<Cell, Cell> uPair;
  std::pair<Cell, Cell> wPair;
};

inline Roles rolesOf(const Pivot& piv) {
  const auto [kind, i, j] = piv;
  if (kind == 0) return {{{i, j}, {i + 1, j}, {i, j + 1}}, {{i, j}, {i, j + 1}}, {{i, j}, {i + 1, j}}};
  return {{{i, j}, {i - 1, j}, {i, j - 1}}, {{i, j - 1}, {i, j}}, {{i - 1, j}, {i, j}}};
}

// Scans every cell of the grid as a candidate pivot of both kinds and keeps
// those whose three cells all lie inside the grid.
inline std::vector<Pivot> bruteForcePivots(int p, int q) {
  std::vector<Pivot> out;
  for (int kind = 0; kind < 2; ++kind) {
    for (int i = 1; i <= p; ++i) {
      for (int j = 1; j <= q; ++j) {
        bool inside = true;
        for (const Cell& c : rolesOf({kind, i, j}).cells) inside = inside && c.i >= 1 && c.i <= p && c.j >= 1 && c.j <= q;
        if (inside) out.emplace_back(kind, i, j);
      }
    }
  }
  return out;
}

struct Counts {
  std::map<Cell, int> f;
  std::map<Cell, int> dU;
  std::map<Cell, int> dW;
};

inline Counts bruteForceCounts(int p, int q) {
  Counts c;
  for (int i = 1; i <= p; ++i)
    for (int j = 1; j <= q; ++j) c.f[{i, j}] = c.dU[{i, j}] = c.dW[{i, j}] = 0;
  for (const Pivot& piv : bruteForcePivots(p, q)) {
    const Roles r = rolesOf(piv);
    for (const Cell& cell : r.cells) ++c.f[cell];
    ++c.dU[r.uPair.first];
    ++c.dU[r.uPair.second];
    ++c.dW[r.wPair.first];
    ++c.dW[r.wPair.second];
  }
  return c;
}

// Dense, loop-based structure objective:
//   sum_k cf_k * f_k + rho * cU * ||U_a - U_b||^2 + rho * cW * ||W_a - W_b||^2
//   + lambda * sum_k cf_k * (||U_k||^2 + ||W_k||^2)
// with coefficients recomputed from bruteForceCounts and the consensus
// terms weighted by the pivot's coefficient.
struct NaiveBlock {
  int rows = 0;
  int cols = 0;
  std::vector<std::tuple<int, int, double>> entries;
  std::vector<std::vector<double>> u;  // rows x r
  std::vector<std::vector<double>> w;  // cols x r
};

inline double sqDiff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double s = 0;
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < a[r].size(); ++c) s += (a[r][c] - b[r][c]) * (a[r][c] - b[r][c]);
  return s;
}

inline double sq(const std::vector<std::vector<double>>& a) {
  double s = 0;
  for (const auto& row : a)
    for (double v : row) s += v * v;
  return s;
}

inline double naiveF(const NaiveBlock& b) {
  double s = 0;
  for (const auto& [r, c, x] : b.entries) {
    double pred = 0;
    for (std::size_t k = 0; k < b.u[r].size(); ++k) pred += b.u[r][k] * b.w[c][k];
    s += (x - pred) * (x - pred);
  }
  return s;
}

inline double naiveStructureObjective(const Pivot& piv, const std::map<Cell, NaiveBlock>& blocks, int p, int q,
                                      double rho, double lambda) {
  const Counts counts = bruteForceCounts(p, q);
  const Roles r = rolesOf(piv);
  const Cell pivot{std::get<1>(piv), std::get<2>(piv)};
  double total = 0;
  for (const Cell& c : r.cells) {
    const double cf = 1.0 / counts.f.at(c);
    const NaiveBlock& b = blocks.at(c);
    total += cf * naiveF(b) + lambda * cf * (sq(b.u) + sq(b.w));
  }
  total += rho / counts.dU.at(pivot) * sqDiff(blocks.at(r.uPair.first).u, blocks.at(r.uPair.second).u);
  total += rho / counts.dW.at(pivot) * sqDiff(blocks.at(r.wPair.first).w, blocks.at(r.wPair.second).w);
  return total;
}

inline NaiveBlock toNaive(const BlockData& data, const FactorPair& f) {
  NaiveBlock b;
  b.rows = static_cast<int>(data.rows());
  b.cols = static_cast<int>(data.cols());
  for (const RatingTriple& e : data.entries()) b.entries.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  b.u.assign(static_cast<std::size_t>(f.u.rows()), std::vector<double>(static_cast<std::size_t>(f.u.cols())));
  b.w.assign(static_cast<std::size_t>(f.w.rows()), std::vector<double>(static_cast<std::size_t>(f.w.cols())));
  for (Index r = 0; r < f.u.rows(); ++r)
    for (Index c = 0; c < f.u.cols(); ++c) b.u[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = f.u(r, c);
  for (Index r = 0; r < f.w.rows(); ++r)
    for (Index c = 0; c < f.w.cols(); ++c) b.w[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = f.w(r, c);
  return b;
}

// A small random problem: grid of blocks with `perBlock` observed entries
// each, factors uniform on [-1, 1].
struct Instance {
  GridSpec grid;
  PartitionedData data;
  FactorState state;
};

inline Instance randomInstance(std::uint64_t seed, Index m, Index n, int p, int q, Index rank, std::size_t perBlock) {
  Rng rng(seed);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  std::uniform_real_distribution<double> factor(-1.0, 1.0);
  const GridSpec grid = makeGrid(m, n, p, q);
  std::vector<RatingTriple> triples;
  for (int i = 1; i <= p; ++i) {
    for (int j = 1; j <= q; ++j) {
      const Range rows = grid.rowRange(i);
      const Range cols = grid.colRange(j);
      std::set<std::pair<Index, Index>> used;
      std::uniform_int_distribution<Index> rr(rows.begin, rows.end - 1);
      std::uniform_int_distribution<Index> cc(cols.begin, cols.end - 1);
      const std::size_t want = std::min<std::size_t>(perBlock, static_cast<std::size_t>(rows.size() * cols.size()));
      while (used.size() < want) {
        const auto cell = std::make_pair(rr(rng), cc(rng));
        if (used.insert(cell).second) triples.push_back({cell.first, cell.second, value(rng)});
      }
    }
  }
  FactorState state(grid, rank);
  for (FactorPair& f : state.pairs()) {
    for (Index k = 0; k < f.u.size(); ++k) f.u.data()[k] = factor(rng);
    for (Index k = 0; k < f.w.size(); ++k) f.w.data()[k] = factor(rng);
  }
  return {grid, PartitionedData(grid, triples), std::move(state)};
}

inline Pivot pivotOf(const Structure& s) {
  return {s.kind() == StructureKind::Upper ? 0 : 1, s.pivot().i, s.pivot().j};
}

inline std::map<Cell, NaiveBlock> naiveBlocks(const PartitionedData& data, const FactorState& state) {
  std::map<Cell, NaiveBlock> out;
  for (int i = 1; i <= data.grid().p(); ++i)
    for (int j = 1; j <= data.grid().q(); ++j) out[{i, j}] = toNaive(data.at({i, j}), state.at({i, j}));
  return out;
}

struct FdResult {
  double maxRelError = 0.0;
  std::size_t coordinates = 0;
};

// Central differences (step h) of naiveStructureObjective over every U and
// W coordinate of the structure's members, compared with `analytic`.
// Relative error |a - fd| / max(|a|, |fd|, floor).
inline FdResult finiteDifferenceCheck(const Structure& s, const PartitionedData& data, const FactorState& state,
                                      double rho, double lambda, const StructureGradient& analytic, double h,
                                      double floor) {
  auto blocks = naiveBlocks(data, state);
  const Pivot piv = pivotOf(s);
  const int p = data.grid().p();
  const int q = data.grid().q();
  FdResult res;
  for (std::size_t k = 0; k < 3; ++k) {
    const Cell cell{s.members()[k].i, s.members()[k].j};
    for (int which = 0; which < 2; ++which) {
      auto& mat = which == 0 ? blocks[cell].u : blocks[cell].w;
      const Matrix& grad = which == 0 ? analytic.members[k].u : analytic.members[k].w;
      for (std::size_t r = 0; r < mat.size(); ++r) {
        for (std::size_t c = 0; c < mat[r].size(); ++c) {
          const double saved = mat[r][c];
          mat[r][c] = saved + h;
          const double plus = naiveStructureObjective(piv, blocks, p, q, rho, lambda);
          mat[r][c] = saved - h;
          const double minus = naiveStructureObjective(piv, blocks, p, q, rho, lambda);
          mat[r][c] = saved;
          const double fd = (plus - minus) / (2 * h);
          const double a = grad(static_cast<Index>(r), static_cast<Index>(c));
          const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
          res.maxRelError = std::max(res.maxRelError, rel);
          ++res.coordinates;
        }
      }
    }
  }
  return res;
}

}  // namespace ggmc::oracle

#endif  // GGMC_TESTS_ORACLES_HPP
