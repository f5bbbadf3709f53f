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

#include "ggmc/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

namespace ggmc {

namespace {

class LineReader {
 public:
  LineReader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

  std::vector<std::string_view> next(const char* expecting) {
    if (!std::getline(is_, line_)) throw ParseError(source_, lineNo_ + 1, std::string("unexpected end of file, expected ") + expecting);
    ++lineNo_;
    std::vector<std::string_view> fields;
    std::string_view rest(line_);
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(" \t\r");
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto stop = rest.find_first_of(" \t\r");
      fields.push_back(rest.substr(0, stop));
      rest.remove_prefix(stop == std::string_view::npos ? rest.size() : stop);
    }
    return fields;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, lineNo_, what); }

  template <typename T>
  T number(std::string_view field) const {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) fail("invalid number '" + std::string(field) + "'");
    return value;
  }

  bool atEnd() {
    std::string rest;
    while (std::getline(is_, rest)) {
      ++lineNo_;
      if (rest.find_first_not_of(" \t\r") != std::string::npos) return false;
    }
    return true;
  }

 private:
  std::istream& is_;
  std::string source_;
  std::string line_;
  std::size_t lineNo_ = 0;
};

void writeRows(std::ostream& os, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << m(r, c);
    }
    os << '\n';
  }
}

void readRows(LineReader& in, Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    const auto fields = in.next("matrix row");
    if (static_cast<Index>(fields.size()) != m.cols()) {
      in.fail("expected " + std::to_string(m.cols()) + " values, found " + std::to_string(fields.size()));
    }
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = in.number<double>(fields[static_cast<std::size_t>(c)]);
  }
}

void readSection(LineReader& in, char tag, BlockId id, Matrix& m) {
  const auto f = in.next("section header");
  if (f.size() != 5 || f[0] != std::string_view(&tag, 1)) in.fail(std::string("expected '") + tag + " i j rows cols'");
  const BlockId got{in.number<int>(f[1]), in.number<int>(f[2])};
  if (got != id) in.fail("blocks out of order, expected " + std::to_string(id.i) + " " + std::to_string(id.j));
  if (in.number<Index>(f[3]) != m.rows() || in.number<Index>(f[4]) != m.cols()) {
    in.fail("block shape does not match the grid");
  }
  readRows(in, m);
}

std::ofstream openOut(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(17);
  return os;
}

std::ifstream openIn(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "': file not found or unreadable");
  return is;
}

}  // namespace

void writeCheckpoint(std::ostream& os, const FactorState& state) {
  const GridSpec& g = state.grid();
  const auto precision = os.precision(17);
  os << "GGMC1 " << g.m() << ' ' << g.n() << ' ' << state.rank() << ' ' << g.p() << ' ' << g.q() << '\n';
  for (std::size_t k = 0; k < g.blockCount(); ++k) {
    const BlockId id = g.blockAt(k);
    const FactorPair& f = state.pairs()[k];
    os << "U " << id.i << ' ' << id.j << ' ' << f.u.rows() << ' ' << f.u.cols() << '\n';
    writeRows(os, f.u);
    os << "W " << id.i << ' ' << id.j << ' ' << f.w.rows() << ' ' << f.w.cols() << '\n';
    writeRows(os, f.w);
  }
  os.precision(precision);
}

void writeCheckpoint(const std::filesystem::path& path, const FactorState& state) {
  auto os = openOut(path);
  writeCheckpoint(os, state);
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

FactorState readCheckpoint(std::istream& is, const std::string& source) {
  LineReader in(is, source);
  const auto h = in.next("header");
  if (h.size() != 6 || h[0] != "GGMC1") in.fail("expected header 'GGMC1 m n r p q'");
  const auto m = in.number<Index>(h[1]);
  const auto n = in.number<Index>(h[2]);
  const auto r = in.number<Index>(h[3]);
  const auto p = in.number<int>(h[4]);
  const auto q = in.number<int>(h[5]);
  FactorState state;
  try {
    state = FactorState(makeGrid(m, n, p, q), r);
  } catch (const InvalidArgument& e) {
    in.fail(e.what());
  }
  for (std::size_t k = 0; k < state.grid().blockCount(); ++k) {
    const BlockId id = state.grid().blockAt(k);
    readSection(in, 'U', id, state.pairs()[k].u);
    readSection(in, 'W', id, state.pairs()[k].w);
  }
  if (!in.atEnd()) in.fail("trailing content after last block");
  return state;
}

FactorState readCheckpoint(const std::filesystem::path& path) {
  auto is = openIn(path);
  return readCheckpoint(is, path.string());
}

void writeGlobalFactors(const std::filesystem::path& path, const GlobalFactors& factors) {
  auto os = openOut(path);
  os << "GGMCF1 " << factors.u.rows() << ' ' << factors.w.rows() << ' ' << factors.u.cols() << '\n';
  os << "U " << factors.u.rows() << ' ' << factors.u.cols() << '\n';
  writeRows(os, factors.u);
  os << "W " << factors.w.rows() << ' ' << factors.w.cols() << '\n';
  writeRows(os, factors.w);
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

GlobalFactors readGlobalFactors(const std::filesystem::path& path) {
  auto is = openIn(path);
  LineReader in(is, path.string());
  const auto h = in.next("header");
  if (h.size() != 4 || h[0] != "GGMCF1") in.fail("expected header 'GGMCF1 m n r'");
  const auto m = in.number<Index>(h[1]);
  const auto n = in.number<Index>(h[2]);
  const auto r = in.number<Index>(h[3]);
  if (m < 1 || n < 1 || r < 1) in.fail("dimensions must be positive");
  GlobalFactors f{Matrix(m, r), Matrix(n, r)};
  for (auto [tag, mat] : {std::pair<const char*, Matrix*>{"U", &f.u}, {"W", &f.w}}) {
    const auto s = in.next("section header");
    if (s.size() != 3 || s[0] != tag || in.number<Index>(s[1]) != mat->rows() || in.number<Index>(s[2]) != r) {
      in.fail(std::string("expected '") + tag + " rows r'");
    }
    readRows(in, *mat);
  }
  return f;
}

}  // namespace ggmc
