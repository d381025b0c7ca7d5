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

#include <optional>
#include <string>
#include <vector>

#include "cograg/cogpred.hpp"
#include "cograg/question.hpp"

namespace cograg::eval {

enum class Mode { kSingle, kScenario };

std::string_view mode_name(Mode m);

struct ExamItem {
  std::string id;
  Mode mode = Mode::kSingle;
  std::string stem;  ///< case text already prepended for scenario items
  Options options;
  char gold = 'A';
  cogpred::CognitiveLevel level = cogpred::CognitiveLevel::kRem;
  std::optional<std::string> scenario_group;
};

/// Reads line-delimited exam records (id, mode, stem, options, gold, level,
/// optional scenario_group and case_text). Scenario sub-questions get their
/// group's case text prepended. Errors are Errc::kData with the line number.
std::vector<ExamItem> load_exam(const std::string& path, std::optional<Mode> only = std::nullopt);
std::vector<ExamItem> parse_exam(std::string_view jsonl, std::optional<Mode> only = std::nullopt);

}  // namespace cograg::eval
