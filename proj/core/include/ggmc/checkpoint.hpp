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

#ifndef GGMC_CHECKPOINT_HPP
#define GGMC_CHECKPOINT_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ggmc/objective.hpp"
#include "ggmc/trainer.hpp"

namespace ggmc {

// Per-block factor checkpoint, text format version 1:
//
//   GGMC1 m n r p q
//   U i j rows cols        (once per block, row-major over the grid,
//   <rows lines of cols     each U section followed by that block's
//    numbers>               W section)
//   W i j rows cols
//   <rows lines>
//
// Numbers are written with 17 significant digits so a write/read cycle is
// lossless.
void writeCheckpoint(std::ostream& os, const FactorState& state);
void writeCheckpoint(const std::filesystem::path& path, const FactorState& state);

// Throws ParseError naming the offending line.
FactorState readCheckpoint(std::istream& is, const std::string& source = "<stream>");
FactorState readCheckpoint(const std::filesystem::path& path);

// Assembled global factors:
//   GGMCF1 m n r
//   U m r
//   <m lines>
//   W n r
//   <n lines>
void writeGlobalFactors(const std::filesystem::path& path, const GlobalFactors& factors);
GlobalFactors readGlobalFactors(const std::filesystem::path& path);

}  // namespace ggmc

#endif  // GGMC_CHECKPOINT_HPP
