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
#include <vector>

#include <json.hpp>

#include "cograg/pipeline.hpp"

namespace cograg::eval {

struct ItemSummary {
  std::string id;
  cogpred::CognitiveLevel level = cogpred::CognitiveLevel::kRem;
  bool answered = false;
  std::optional<char> answer;
  bool correct = false;
  bool triggered = false;

  bool operator==(const ItemSummary&) const = default;
};

/// Percentages are stored at full precision; rounding happens in emit_report.
struct EvalReport {
  std::size_t item_count = 0;
  std::size_t correct_count = 0;
  double overall = 0;
  double macro = 0;
  std::array<std::optional<double>, 5> per_level{};  ///< empty for an empty stratum
  std::array<std::size_t, 5> level_counts{};
  std::vector<std::string> empty_strata;  ///< level codes left out of the macro mean

  std::size_t unanswered_count = 0;
  double unanswered_rate = 0;
  std::size_t trigger_count = 0;
  double trigger_rate = 0;
  std::size_t corrected_after_trigger = 0;

  std::size_t routing_evaluated = 0;
  std::optional<double> routing_hit_overall;
  std::optional<double> routing_hit_low;
  std::optional<double> routing_hit_high;
  std::size_t defaulted_level_predictions = 0;
  std::size_t defaulted_tag_predictions = 0;

  std::vector<ItemSummary> items;

  bool operator==(const EvalReport&) const = default;
};

/// Throws Errc::kData on an empty record set.
EvalReport compute_report(const std::vector<ItemRecord>& records);

enum class ReportFormat { kTable, kMachine };

/// "72.06" -> "72.1", "72.04" -> "72.0".
std::string format_one_decimal(double value);

std::string emit_report(const EvalReport& report, ReportFormat format);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace cograg::eval
