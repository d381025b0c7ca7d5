/*
 * Copyright 2026 The cograg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace cograg {

using Options = std::array<std::string, 4>;

inline constexpr std::array<char, 4> kLetters = {'A', 'B', 'C', 'D'};

inline bool is_letter(char c) { return c >= 'A' && c <= 'D'; }
inline std::size_t letter_index(char c) { return static_cast<std::size_t>(c - 'A'); }

/// "A. ...\nB. ...\nC. ...\nD. ..."
std::string render_options(const Options& options);

/// Pulls an option letter out of a model reply. Accepts "Answer: B",
/// "the answer is (C)", or a reply that is just the letter ("D", "(A)",
/// "B."). Anything else yields nullopt.
std::optional<char> extract_letter(std::string_view reply);

}  // namespace cograg
