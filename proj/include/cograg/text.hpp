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

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cograg::text {

/// Lowercased alphanumeric runs. Bytes >= 0x80 are kept inside tokens so
/// UTF-8 words survive; everything else separates.
std::vector<std::string> tokenize(std::string_view s);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Splits at '.', '!', '?' (and the CJK full stop) when followed by
/// whitespace or end of text. Each piece keeps its terminator; trailing text
/// without a terminator is the last piece.
std::vector<std::string> split_sentences(std::string_view s);

/// Number of sentence terminators that end a sentence (see split_sentences).
std::size_t count_terminators(std::string_view s);

using TokenCounter = std::function<std::size_t(std::string_view)>;

std::size_t whitespace_token_count(std::string_view s);

/// Replaces every `{{name}}` with the matching value; unknown names are left.
std::string render(std::string_view tmpl,
                   const std::vector<std::pair<std::string, std::string>>& vars);

}  // namespace cograg::text
