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

#ifndef GGMC_SRC_TEXT_UTIL_HPP
#define GGMC_SRC_TEXT_UTIL_HPP

#include <charconv>
#include <optional>
#include <string_view>
#include <vector>

namespace ggmc::detail {

inline std::string_view trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string_view> splitWhitespace(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto start = s.find_first_not_of(" \t\r\n");
    if (start == std::string_view::npos) break;
    s.remove_prefix(start);
    const auto stop = s.find_first_of(" \t\r\n");
    out.push_back(s.substr(0, stop));
    if (stop == std::string_view::npos) break;
    s.remove_prefix(stop);
  }
  return out;
}

inline std::vector<std::string_view> splitOn(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + sep.size();
  }
  return out;
}

// Whole-field numeric parse; nullopt on any leftover character.
template <typename T>
std::optional<T> parseNumber(std::string_view field) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  T value{};
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace ggmc::detail

#endif  // GGMC_SRC_TEXT_UTIL_HPP
