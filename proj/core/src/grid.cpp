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

#include "ggmc/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace ggmc {

namespace {

std::vector<Range> balancedSplit(Index total, int parts) {
  std::vector<Range> ranges;
  ranges.reserve(static_cast<std::size_t>(parts));
  const Index base = total / parts;
  const Index extra = total % parts;
  Index begin = 0;
  for (int k = 0; k < parts; ++k) {
    const Index len = base + (k < extra ? 1 : 0);
    ranges.push_back({begin, begin + len});
    begin += len;
  }
  return ranges;
}

int ownerOf(const std::vector<Range>& ranges, Index k, const char* axis) {
  if (ranges.empty() || k < 0 || k >= ranges.back().end) {
    throw InvalidArgument(std::string(axis) + " index " + std::to_string(k) + " outside the grid");
  }
  auto it = std::upper_bound(ranges.begin(), ranges.end(), k,
                             [](Index v, const Range& r) { return v < r.begin; });
  return static_cast<int>(it - ranges.begin());
}

}  // namespace

std::ostream& operator<<(std::ostream& os, const BlockId& id) { return os << '(' << id.i << ',' << id.j << ')'; }

bool edgeAdjacent(BlockId a, BlockId b) noexcept { return std::abs(a.i - b.i) + std::abs(a.j - b.j) == 1; }

int GridSpec::blockRowOf(Index row) const { return ownerOf(rowRanges_, row, "row"); }
int GridSpec::blockColOf(Index col) const { return ownerOf(colRanges_, col, "column"); }

GridSpec makeGrid(Index m, Index n, int p, int q) {
  if (m < 1 || n < 1) throw InvalidArgument("matrix dimensions must be positive");
  if (p < 2 || q < 2) {
    throw InvalidArgument("grid must be at least 2x2 (got " + std::to_string(p) + "x" + std::to_string(q) +
                          "); smaller grids admit no structure");
  }
  if (p > m || q > n) {
    throw InvalidArgument("grid " + std::to_string(p) + "x" + std::to_string(q) + " would leave empty blocks in a " +
                          std::to_string(m) + "x" + std::to_string(n) + " matrix");
  }
  GridSpec g;
  g.m_ = m;
  g.n_ = n;
  g.p_ = p;
  g.q_ = q;
  g.rowRanges_ = balancedSplit(m, p);
  g.colRanges_ = balancedSplit(n, q);
  return g;
}

Structure::Structure(StructureKind kind, BlockId pivot) : kind_(kind) {
  const int step = kind == StructureKind::Upper ? 1 : -1;
  members_ = {pivot, BlockId{pivot.i + step, pivot.j}, BlockId{pivot.i, pivot.j + step}};
}

bool Structure::contains(BlockId id) const noexcept {
  return std::find(members_.begin(), members_.end(), id) != members_.end();
}

bool Structure::overlaps(const Structure& other) const noexcept {
  return std::any_of(members_.begin(), members_.end(), [&](BlockId id) { return other.contains(id); });
}

bool Structure::validFor(const GridSpec& grid) const noexcept {
  return std::all_of(members_.begin(), members_.end(), [&](BlockId id) { return grid.contains(id); });
}

std::ostream& operator<<(std::ostream& os, const Structure& s) {
  return os << (s.kind() == StructureKind::Upper ? "Upper" : "Lower") << s.pivot();
}

Structure structureAt(const GridSpec& grid, std::size_t k) {
  const std::size_t half = structureCount(grid) / 2;
  if (k >= 2 * half) throw InvalidArgument("structure index " + std::to_string(k) + " out of range");
  const auto width = static_cast<std::size_t>(grid.q() - 1);
  if (k < half) {
    return {StructureKind::Upper, {static_cast<int>(k / width) + 1, static_cast<int>(k % width) + 1}};
  }
  k -= half;
  return {StructureKind::Lower, {static_cast<int>(k / width) + 2, static_cast<int>(k % width) + 2}};
}

std::vector<Structure> enumerateStructures(const GridSpec& grid) {
  std::vector<Structure> out;
  out.reserve(structureCount(grid));
  for (std::size_t k = 0; k < structureCount(grid); ++k) out.push_back(structureAt(grid, k));
  return out;
}

Structure sampleStructure(const GridSpec& grid, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, structureCount(grid) - 1);
  return structureAt(grid, pick(rng));
}

MembershipCounts countMemberships(const GridSpec& grid) {
  MembershipCounts c;
  c.f.assign(grid.blockCount(), 0);
  c.dU.assign(grid.blockCount(), 0);
  c.dW.assign(grid.blockCount(), 0);
  for (const Structure& s : enumerateStructures(grid)) {
    const auto& mem = s.members();
    for (BlockId id : mem) ++c.f[grid.linearIndex(id)];
    ++c.dW[grid.linearIndex(mem[0])];
    ++c.dW[grid.linearIndex(mem[1])];
    ++c.dU[grid.linearIndex(mem[0])];
    ++c.dU[grid.linearIndex(mem[2])];
  }
  return c;
}

NormalizationTable computeNormalization(const GridSpec& grid) {
  const MembershipCounts c = countMemberships(grid);
  NormalizationTable t;
  t.p = grid.p();
  t.q = grid.q();
  auto invert = [](const std::vector<int>& counts) {
    std::vector<double> out(counts.size());
    std::transform(counts.begin(), counts.end(), out.begin(),
                   [](int k) { return k > 0 ? 1.0 / static_cast<double>(k) : 0.0; });
    return out;
  };
  t.fCoeff = invert(c.f);
  t.dUCoeff = invert(c.dU);
  t.dWCoeff = invert(c.dW);
  return t;
}

}  // namespace ggmc
