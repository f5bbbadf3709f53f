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

#ifndef GGMC_DATA_IO_HPP
#define GGMC_DATA_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ggmc/common.hpp"
#include "ggmc/trainer.hpp"

namespace ggmc {

// Bijection between sparse external ids and dense 0-based indices, in
// order of first appearance.
class IdMap {
 public:
  Index intern(std::int64_t original);
  std::optional<Index> find(std::int64_t original) const;
  std::int64_t original(Index dense) const { return original_.at(static_cast<std::size_t>(dense)); }
  Index size() const noexcept { return static_cast<Index>(original_.size()); }
  bool empty() const noexcept { return original_.empty(); }

  friend bool operator==(const IdMap& a, const IdMap& b) { return a.original_ == b.original_; }

 private:
  std::vector<std::int64_t> original_;
  std::unordered_map<std::int64_t, Index> dense_;
};

struct Dataset {
  Index m = 0;
  Index n = 0;
  std::vector<RatingTriple> train;
  std::vector<RatingTriple> test;
  IdMap rowIds;
  IdMap colIds;
};

struct SyntheticData {
  Dataset dataset;
  GlobalFactors truth;
};

// Ground truth A (m x rank), B (n x rank) with U[-1,1] entries; observed
// values are <A_row, B_col>. Train and test cells are disjoint uniform
// samples of floor(fraction * m * n) cells each.
SyntheticData generateSynthetic(Index m, Index n, Index rank, double trainFraction, double testFraction, Rng& rng);

enum class RatingFormat { Dat, Csv };

// Picks the format from the extension (.dat / .csv); nullopt otherwise.
std::optional<RatingFormat> ratingFormatOf(const std::filesystem::path& path);

// MovieLens ratings. dat: `UserID::MovieID::Rating::Timestamp`; csv: one
// header line then `userId,movieId,rating,timestamp`. Users map to rows and
// movies to columns. All ratings land in `train`.
Dataset loadMovieLens(std::istream& is, RatingFormat format, const std::string& source = "<stream>");
Dataset loadMovieLens(const std::filesystem::path& path, RatingFormat format);

// Moves round(testFraction * |train|) uniformly chosen triples of an unsplit
// dataset into `test`.
Dataset trainTestSplit(const Dataset& dataset, double testFraction, Rng& rng);

// Root mean squared error of raw dot-product predictions.
double rmse(std::span<const RatingTriple> test, const Matrix& u, const Matrix& w);
inline double rmse(std::span<const RatingTriple> test, const GlobalFactors& f) { return rmse(test, f.u, f.w); }

// Triple files: optional `# ggmc-triples m n` header, then `row col value`
// per line. Other `#` lines and blank lines are ignored.
struct TripleFile {
  std::optional<Index> m;
  std::optional<Index> n;
  std::vector<RatingTriple> triples;
};

void writeTriples(const std::filesystem::path& path, std::span<const RatingTriple> triples, Index m, Index n);
TripleFile readTriples(std::istream& is, const std::string& source = "<stream>");
TripleFile readTriples(const std::filesystem::path& path);

// `original_id dense_index` per line, ordered by dense index.
void writeIdMap(const std::filesystem::path& path, const IdMap& map);
IdMap readIdMap(const std::filesystem::path& path);

// dir/train.triples, dir/test.triples, dir/rows.idmap, dir/cols.idmap.
// Id maps are written only when non-empty.
void saveDataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset loadDataset(const std::filesystem::path& dir);

struct MetricsRow {
  std::size_t iteration = 0;
  double cost = 0.0;
  std::optional<double> rmseTest;
  std::optional<std::uint64_t> messagesSent;
  std::optional<std::uint64_t> rounds;
};

// CSV stream with header `iteration,cost,rmse_test,messages_sent,rounds`;
// absent values are left empty.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::ostream& os);
  void write(const MetricsRow& row);

 private:
  std::ostream& os_;
};

struct MetricsRowParsed {
  std::size_t iteration;
  double cost;
  std::optional<double> rmseTest;
};
std::vector<MetricsRowParsed> readMetrics(const std::filesystem::path& path);

}  // namespace ggmc

#endif  // GGMC_DATA_IO_HPP
