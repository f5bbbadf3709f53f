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

#ifndef GGMC_GRID_HPP
#define GGMC_GRID_HPP

#include <array>
#include <compare>
#include <ostream>
#include <vector>

#include "ggmc/common.hpp"

namespace ggmc {

// Half-open index interval [begin, end).
struct Range {
  Index begin = 0;
  Index end = 0;

  Index size() const noexcept { return end - begin; }
  bool contains(Index k) const noexcept { return k >= begin && k < end; }
  friend bool operator==(const Range&, const Range&) = default;
};

// Grid cell coordinates, 1-based on both axes.
struct BlockId {
  int i = 1;
  int j = 1;

  friend auto operator<=>(const BlockId&, const BlockId&) = default;
};

std::ostream& operator<<(std::ostream& os, const BlockId& id);

// True when the two blocks share an edge.
bool edgeAdjacent(BlockId a, BlockId b) noexcept;

// A p x q partition of an m x n matrix into contiguous, balanced blocks.
class GridSpec {
 public:
  GridSpec() = default;

  Index m() const noexcept { return m_; }
  Index n() const noexcept { return n_; }
  int p() const noexcept { return p_; }
  int q() const noexcept { return q_; }

  const std::vector<Range>& rowRanges() const noexcept { return rowRanges_; }
  const std::vector<Range>& colRanges() const noexcept { return colRanges_; }
  const Range& rowRange(int i) const { return rowRanges_.at(static_cast<std::size_t>(i - 1)); }
  const Range& colRange(int j) const { return colRanges_.at(static_cast<std::size_t>(j - 1)); }

  bool contains(BlockId id) const noexcept { return id.i >= 1 && id.i <= p_ && id.j >= 1 && id.j <= q_; }
  std::size_t blockCount() const noexcept { return static_cast<std::size_t>(p_) * static_cast<std::size_t>(q_); }
  // Row-major position of a block in per-block storage.
  std::size_t linearIndex(BlockId id) const noexcept {
    return static_cast<std::size_t>(id.i - 1) * static_cast<std::size_t>(q_) + static_cast<std::size_t>(id.j - 1);
  }
  BlockId blockAt(std::size_t linear) const noexcept {
    return {static_cast<int>(linear / static_cast<std::size_t>(q_)) + 1,
            static_cast<int>(linear % static_cast<std::size_t>(q_)) + 1};
  }

  // Grid row/column owning a global matrix row/column.
  int blockRowOf(Index row) const;
  int blockColOf(Index col) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  friend GridSpec makeGrid(Index m, Index n, int p, int q);

  Index m_ = 0;
  Index n_ = 0;
  int p_ = 0;
  int q_ = 0;
  std::vector<Range> rowRanges_;
  std::vector<Range> colRanges_;
};

// Balanced split: the first (m mod p) block rows get one extra row, same for
// columns. Throws InvalidArgument for p < 2, q < 2, p > m or q > n.
GridSpec makeGrid(Index m, Index n, int p, int q);

enum class StructureKind { Upper, Lower };

// Three edge-adjacent blocks around a pivot.
//   Upper(i,j) = {(i,j), (i+1,j), (i,j+1)}
//   Lower(i,j) = {(i,j), (i-1,j), (i,j-1)}
// members()[0] is always the pivot. The W-consensus pair is members 0 and 1
// (same grid column), the U-consensus pair is members 0 and 2 (same grid row).
class Structure {
 public:
  Structure(StructureKind kind, BlockId pivot);

  StructureKind kind() const noexcept { return kind_; }
  BlockId pivot() const noexcept { return members_[0]; }
  const std::array<BlockId, 3>& members() const noexcept { return members_; }
  bool contains(BlockId id) const noexcept;
  bool overlaps(const Structure& other) const noexcept;
  bool validFor(const GridSpec& grid) const noexcept;

  friend bool operator==(const Structure& a, const Structure& b) noexcept {
    return a.kind_ == b.kind_ && a.members_[0] == b.members_[0];
  }

 private:
  StructureKind kind_;
  std::array<BlockId, 3> members_;
};

std::ostream& operator<<(std::ostream& os, const Structure& s);

inline std::size_t structureCount(const GridSpec& grid) noexcept {
  return 2 * static_cast<std::size_t>(grid.p() - 1) * static_cast<std::size_t>(grid.q() - 1);
}

// The k-th valid structure in enumeration order: Upper pivots row-major,
// then Lower pivots row-major.
Structure structureAt(const GridSpec& grid, std::size_t k);

// All valid structures, in the order of structureAt.
std::vector<Structure> enumerateStructures(const GridSpec& grid);

// Uniform draw over enumerateStructures(grid), consuming exactly one
// uniform_int_distribution sample from `rng`.
Structure sampleStructure(const GridSpec& grid, Rng& rng);

// Per-block inverse membership counts (row-major). The U/W tables count
// consensus terms a block's factor takes part in; blocks in none get 0.
struct NormalizationTable {
  int p = 0;
  int q = 0;
  std::vector<double> fCoeff;
  std::vector<double> dUCoeff;
  std::vector<double> dWCoeff;

  std::size_t at(BlockId id) const noexcept {
    return static_cast<std::size_t>(id.i - 1) * static_cast<std::size_t>(q) + static_cast<std::size_t>(id.j - 1);
  }
  double f(BlockId id) const { return fCoeff.at(at(id)); }
  double dU(BlockId id) const { return dUCoeff.at(at(id)); }
  double dW(BlockId id) const { return dWCoeff.at(at(id)); }
};

// Raw membership counts behind a NormalizationTable.
struct MembershipCounts {
  std::vector<int> f;
  std::vector<int> dU;
  std::vector<int> dW;
};

MembershipCounts countMemberships(const GridSpec& grid);
NormalizationTable computeNormalization(const GridSpec& grid);

}  // namespace ggmc

#endif  // GGMC_GRID_HPP
