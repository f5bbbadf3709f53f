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

#ifndef GGMC_RUN_CONFIG_HPP
#define GGMC_RUN_CONFIG_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ggmc/trainer.hpp"

namespace ggmc {

enum class RunMode { Sequential, Gossip };

struct RunConfig {
  TrainConfig train;
  RunMode mode = RunMode::Sequential;
  double testFraction = 0.2;
};

// Keys accepted in a run config file, in documentation order.
const std::vector<std::string_view>& runConfigKeys();

// Sets one key from its textual value. Throws InvalidArgument for unknown
// keys or values that do not parse to the key's type.
void applyConfigValue(RunConfig& config, std::string_view key, std::string_view value);

// Flat `key = value` document, one pair per line; `#` starts a comment.
// Errors are ParseErrors carrying the line number.
RunConfig parseRunConfig(std::istream& is, const std::string& source = "<stream>", RunConfig base = {});
RunConfig loadRunConfig(const std::filesystem::path& path, RunConfig base = {});

// Renders every key with its current value, loadable by parseRunConfig.
std::string formatRunConfig(const RunConfig& config);

}  // namespace ggmc

#endif  // GGMC_RUN_CONFIG_HPP
