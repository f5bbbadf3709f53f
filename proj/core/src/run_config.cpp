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

#include "ggmc/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace ggmc {

namespace {

template <typename T>
T parseAs(std::string_view key, std::string_view value) {
  const auto v = detail::parseNumber<T>(value);
  if (!v) throw InvalidArgument("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(*v)) throw InvalidArgument("non-finite value for key '" + std::string(key) + "'");
  }
  return *v;
}

}  // namespace

const std::vector<std::string_view>& runConfigKeys() {
  static const std::vector<std::string_view> keys = {"rho",  "lambda",     "rank",     "p",         "q",
                                                     "a",    "b",          "max_iters", "eval_every", "tol",
                                                     "seed", "init_scale", "mode",      "test_fraction"};
  return keys;
}

void applyConfigValue(RunConfig& config, std::string_view key, std::string_view value) {
  value = detail::trim(value);
  TrainConfig& t = config.train;
  if (key == "rho") t.rho = parseAs<double>(key, value);
  else if (key == "lambda") t.lambda = parseAs<double>(key, value);
  else if (key == "rank") t.rank = parseAs<Index>(key, value);
  else if (key == "p") t.p = parseAs<int>(key, value);
  else if (key == "q") t.q = parseAs<int>(key, value);
  else if (key == "a") t.a = parseAs<double>(key, value);
  else if (key == "b") t.b = parseAs<double>(key, value);
  else if (key == "max_iters") t.maxIters = parseAs<std::size_t>(key, value);
  else if (key == "eval_every") t.evalEvery = parseAs<std::size_t>(key, value);
  else if (key == "tol") t.tol = parseAs<double>(key, value);
  else if (key == "seed") t.seed = parseAs<std::uint64_t>(key, value);
  else if (key == "init_scale") t.initScale = parseAs<double>(key, value);
  else if (key == "test_fraction") {
    config.testFraction = parseAs<double>(key, value);
    if (config.testFraction < 0.0 || config.testFraction >= 1.0) {
      throw InvalidArgument("test_fraction must lie in [0, 1)");
    }
  } else if (key == "mode") {
    if (value == "sequential") config.mode = RunMode::Sequential;
    else if (value == "gossip") config.mode = RunMode::Gossip;
    else throw InvalidArgument("mode must be 'sequential' or 'gossip', got '" + std::string(value) + "'");
  } else {
    throw InvalidArgument("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parseRunConfig(std::istream& is, const std::string& source, RunConfig base) {
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    std::string_view text(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, lineNo, "expected 'key = value'");
    const auto key = detail::trim(text.substr(0, eq));
    try {
      applyConfigValue(base, key, text.substr(eq + 1));
    } catch (const InvalidArgument& e) {
      throw ParseError(source, lineNo, e.what());
    }
  }
  return base;
}

RunConfig loadRunConfig(const std::filesystem::path& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path.string() + "': file not found or unreadable");
  return parseRunConfig(is, path.string(), std::move(base));
}

std::string formatRunConfig(const RunConfig& config) {
  const TrainConfig& t = config.train;
  std::ostringstream os;
  os.precision(17);
  os << "rho = " << t.rho << "\nlambda = " << t.lambda << "\nrank = " << t.rank << "\np = " << t.p
     << "\nq = " << t.q << "\na = " << t.a << "\nb = " << t.b << "\nmax_iters = " << t.maxIters
     << "\neval_every = " << t.evalEvery << "\ntol = " << t.tol << "\nseed = " << t.seed
     << "\ninit_scale = " << t.effectiveInitScale()
     << "\nmode = " << (config.mode == RunMode::Gossip ? "gossip" : "sequential")
     << "\ntest_fraction = " << config.testFraction << '\n';
  return os.str();
}

}  // namespace ggmc
