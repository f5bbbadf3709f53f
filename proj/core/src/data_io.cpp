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

#include "ggmc/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <unordered_set>

#include "text_util.hpp"

namespace ggmc {

namespace {

using detail::parseNumber;

std::ifstream openIn(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "': file not found or unreadable");
  return is;
}

std::ofstream openOut(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(17);
  return os;
}

void sortByCell(std::vector<RatingTriple>& v) {
  std::sort(v.begin(), v.end(), [](const RatingTriple& a, const RatingTriple& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
}

}  // namespace

Index IdMap::intern(std::int64_t original) {
  auto [it, inserted] = dense_.try_emplace(original, static_cast<Index>(original_.size()));
  if (inserted) original_.push_back(original);
  return it->second;
}

std::optional<Index> IdMap::find(std::int64_t original) const {
  auto it = dense_.find(original);
  if (it == dense_.end()) return std::nullopt;
  return it->second;
}

SyntheticData generateSynthetic(Index m, Index n, Index rank, double trainFraction, double testFraction, Rng& rng) {
  if (m < 1 || n < 1) throw InvalidArgument("matrix dimensions must be positive");
  if (rank < 1 || rank > std::min(m, n)) {
    throw InvalidArgument("rank " + std::to_string(rank) + " must lie in [1, min(m, n) = " +
                          std::to_string(std::min(m, n)) + "]");
  }
  if (!(trainFraction >= 0.0) || !(testFraction >= 0.0) || trainFraction + testFraction > 1.0) {
    throw InvalidArgument("train and test fractions must be >= 0 and sum to at most 1");
  }

  SyntheticData out;
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  out.truth.u = Matrix(m, rank);
  out.truth.w = Matrix(n, rank);
  for (Index k = 0; k < out.truth.u.size(); ++k) out.truth.u.data()[k] = entry(rng);
  for (Index k = 0; k < out.truth.w.size(); ++k) out.truth.w.data()[k] = entry(rng);

  const auto cells = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n);
  const auto trainCount = static_cast<std::uint64_t>(std::floor(trainFraction * static_cast<double>(cells)));
  const auto testCount = static_cast<std::uint64_t>(std::floor(testFraction * static_cast<double>(cells)));
  const std::uint64_t k = std::min(cells, trainCount + testCount);

  // Floyd's algorithm: k distinct cells without materialising all m*n.
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(k));
  std::vector<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  for (std::uint64_t j = cells - k; j < cells; ++j) {
    std::uniform_int_distribution<std::uint64_t> pick(0, j);
    const std::uint64_t t = pick(rng);
    const std::uint64_t cell = seen.insert(t).second ? t : (seen.insert(j), j);
    chosen.push_back(cell);
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);

  Dataset& d = out.dataset;
  d.m = m;
  d.n = n;
  auto toTriple = [&](std::uint64_t cell) {
    const auto row = static_cast<Index>(cell / static_cast<std::uint64_t>(n));
    const auto col = static_cast<Index>(cell % static_cast<std::uint64_t>(n));
    return RatingTriple{row, col, predict(out.truth.u, out.truth.w, row, col)};
  };
  d.train.reserve(static_cast<std::size_t>(trainCount));
  for (std::uint64_t t = 0; t < trainCount; ++t) d.train.push_back(toTriple(chosen[t]));
  for (std::uint64_t t = trainCount; t < k; ++t) d.test.push_back(toTriple(chosen[t]));
  sortByCell(d.train);
  sortByCell(d.test);
  return out;
}

std::optional<RatingFormat> ratingFormatOf(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".dat") return RatingFormat::Dat;
  if (ext == ".csv") return RatingFormat::Csv;
  return std::nullopt;
}

Dataset loadMovieLens(std::istream& is, RatingFormat format, const std::string& source) {
  Dataset d;
  std::string line;
  std::size_t lineNo = 0;
  bool sawHeader = false;
  while (std::getline(is, line)) {
    ++lineNo;
    const std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    if (format == RatingFormat::Csv && !sawHeader) {
      sawHeader = true;
      continue;
    }
    const auto fields = detail::splitOn(text, format == RatingFormat::Dat ? "::" : ",");
    if (fields.size() != 4) {
      throw ParseError(source, lineNo, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    const auto user = parseNumber<std::int64_t>(fields[0]);
    const auto item = parseNumber<std::int64_t>(fields[1]);
    const auto rating = parseNumber<double>(fields[2]);
    if (!user || !item || !rating || !std::isfinite(*rating) || !parseNumber<std::int64_t>(fields[3])) {
      throw ParseError(source, lineNo, "malformed rating line '" + std::string(text) + "'");
    }
    d.train.push_back({d.rowIds.intern(*user), d.colIds.intern(*item), *rating});
  }
  if (d.train.empty()) throw ParseError(source, 0, "no ratings found (empty file)");
  d.m = d.rowIds.size();
  d.n = d.colIds.size();
  return d;
}

Dataset loadMovieLens(const std::filesystem::path& path, RatingFormat format) {
  auto is = openIn(path);
  return loadMovieLens(is, format, path.string());
}

Dataset trainTestSplit(const Dataset& dataset, double testFraction, Rng& rng) {
  if (!(testFraction >= 0.0 && testFraction <= 1.0)) throw InvalidArgument("test fraction must lie in [0, 1]");
  if (!dataset.test.empty()) throw InvalidArgument("dataset is already split");
  Dataset out = dataset;
  std::shuffle(out.train.begin(), out.train.end(), rng);
  const auto testCount =
      static_cast<std::size_t>(std::llround(testFraction * static_cast<double>(out.train.size())));
  out.test.assign(out.train.begin(), out.train.begin() + static_cast<std::ptrdiff_t>(testCount));
  out.train.erase(out.train.begin(), out.train.begin() + static_cast<std::ptrdiff_t>(testCount));
  return out;
}

double rmse(std::span<const RatingTriple> test, const Matrix& u, const Matrix& w) {
  if (test.empty()) throw InvalidArgument("rmse of an empty test set");
  double sum = 0.0;
  for (const RatingTriple& t : test) {
    const double err = t.value - predict(u, w, t.row, t.col);
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(test.size()));
}

void writeTriples(const std::filesystem::path& path, std::span<const RatingTriple> triples, Index m, Index n) {
  auto os = openOut(path);
  os << "# ggmc-triples " << m << ' ' << n << '\n';
  for (const RatingTriple& t : triples) os << t.row << ' ' << t.col << ' ' << t.value << '\n';
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

TripleFile readTriples(std::istream& is, const std::string& source) {
  TripleFile out;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    const auto fields = detail::splitWhitespace(line);
    if (fields.empty()) continue;
    if (fields[0].starts_with('#')) {
      if (fields.size() == 4 && fields[0] == "#" && fields[1] == "ggmc-triples") {
        out.m = parseNumber<Index>(fields[2]);
        out.n = parseNumber<Index>(fields[3]);
        if (!out.m || !out.n || *out.m < 1 || *out.n < 1) throw ParseError(source, lineNo, "bad dimension header");
      }
      continue;
    }
    if (fields.size() != 3) throw ParseError(source, lineNo, "expected 'row col value'");
    const auto row = parseNumber<Index>(fields[0]);
    const auto col = parseNumber<Index>(fields[1]);
    const auto value = parseNumber<double>(fields[2]);
    if (!row || !col || !value || *row < 0 || *col < 0 || !std::isfinite(*value)) {
      throw ParseError(source, lineNo, "malformed triple '" + line + "'");
    }
    if ((out.m && *row >= *out.m) || (out.n && *col >= *out.n)) {
      throw ParseError(source, lineNo, "index outside the declared matrix dimensions");
    }
    out.triples.push_back({*row, *col, *value});
  }
  return out;
}

TripleFile readTriples(const std::filesystem::path& path) {
  auto is = openIn(path);
  return readTriples(is, path.string());
}

void writeIdMap(const std::filesystem::path& path, const IdMap& map) {
  auto os = openOut(path);
  for (Index k = 0; k < map.size(); ++k) os << map.original(k) << ' ' << k << '\n';
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

IdMap readIdMap(const std::filesystem::path& path) {
  auto is = openIn(path);
  IdMap map;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    const auto fields = detail::splitWhitespace(line);
    if (fields.empty()) continue;
    const auto original = fields.size() == 2 ? parseNumber<std::int64_t>(fields[0]) : std::nullopt;
    const auto dense = fields.size() == 2 ? parseNumber<Index>(fields[1]) : std::nullopt;
    if (!original || !dense) throw ParseError(path.string(), lineNo, "expected 'original_id dense_index'");
    if (*dense != map.size() || map.find(*original)) {
      throw ParseError(path.string(), lineNo, "id map must list each id once, in dense-index order");
    }
    map.intern(*original);
  }
  return map;
}

void saveDataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  writeTriples(dir / "train.triples", dataset.train, dataset.m, dataset.n);
  writeTriples(dir / "test.triples", dataset.test, dataset.m, dataset.n);
  if (!dataset.rowIds.empty()) writeIdMap(dir / "rows.idmap", dataset.rowIds);
  if (!dataset.colIds.empty()) writeIdMap(dir / "cols.idmap", dataset.colIds);
}

Dataset loadDataset(const std::filesystem::path& dir) {
  Dataset d;
  TripleFile train = readTriples(dir / "train.triples");
  TripleFile test = readTriples(dir / "test.triples");
  d.m = train.m.value_or(0);
  d.n = train.n.value_or(0);
  d.train = std::move(train.triples);
  d.test = std::move(test.triples);
  if (std::filesystem::exists(dir / "rows.idmap")) d.rowIds = readIdMap(dir / "rows.idmap");
  if (std::filesystem::exists(dir / "cols.idmap")) d.colIds = readIdMap(dir / "cols.idmap");
  return d;
}

MetricsWriter::MetricsWriter(std::ostream& os) : os_(os) {
  os_ << "iteration,cost,rmse_test,messages_sent,rounds\n";
}

void MetricsWriter::write(const MetricsRow& row) {
  const auto precision = os_.precision(17);
  os_ << row.iteration << ',' << row.cost << ',';
  if (row.rmseTest) os_ << *row.rmseTest;
  os_ << ',';
  if (row.messagesSent) os_ << *row.messagesSent;
  os_ << ',';
  if (row.rounds) os_ << *row.rounds;
  os_ << '\n';
  os_.flush();
  os_.precision(precision);
}

std::vector<MetricsRowParsed> readMetrics(const std::filesystem::path& path) {
  auto is = openIn(path);
  std::vector<MetricsRowParsed> rows;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    if (++lineNo == 1) continue;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::splitOn(line, ",");
    const auto it = f.size() == 5 ? parseNumber<std::size_t>(f[0]) : std::nullopt;
    const auto cost = f.size() == 5 ? parseNumber<double>(f[1]) : std::nullopt;
    if (!it || !cost) throw ParseError(path.string(), lineNo, "malformed metrics row");
    rows.push_back({*it, *cost, f[2].empty() ? std::nullopt : parseNumber<double>(f[2])});
  }
  return rows;
}

}  // namespace ggmc
