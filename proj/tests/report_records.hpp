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
#include <string>
#include <vector>

#include "cograg/pipeline.hpp"

namespace cograg::testing_support {

inline eval::ItemRecord record(const std::string& id, cogpred::CognitiveLevel level, bool answered,
                               bool correct) {
  eval::ItemRecord r;
  r.id = id;
  r.gold = 'A';
  r.gold_level = level;
  if (answered) {
    r.outcome.status = reason::Status::kAnswered;
    r.outcome.letter = correct ? 'A' : 'B';
  }
  r.correct = answered && correct;
  return r;
}

/// `totals[i]` items of level i, the first `correct[i]` of them correct.
inline std::vector<eval::ItemRecord> records_with_accuracy(const std::array<int, 5>& correct,
                                                           const std::array<int, 5>& totals) {
  std::vector<eval::ItemRecord> out;
  for (std::size_t l = 0; l < 5; ++l) {
    for (int i = 0; i < totals[l]; ++i) {
      out.push_back(record("L" + std::to_string(l) + "-" + std::to_string(i), cogpred::kAllLevels[l], true,
                           i < correct[l]));
    }
  }
  return out;
}

/// `triggered` of `total` records carry a fired trigger decision.
inline std::vector<eval::ItemRecord> records_with_triggers(int triggered, int total) {
  std::vector<eval::ItemRecord> out;
  for (int i = 0; i < total; ++i) {
    auto r = record("t" + std::to_string(i), cogpred::kAllLevels[static_cast<std::size_t>(i % 5)], true, true);
    judge::TriggerDecision d;
    d.triggered = i < triggered;
    d.reason = d.triggered ? judge::TriggerReason::kMargin : judge::TriggerReason::kNone;
    r.trigger = d;
    out.push_back(std::move(r));
  }
  return out;
}

/// Ten items, two per gold level, with fixed predicted categories.
/// Hand count: hits 7/10; LOW golds 3/4; HIGH golds 4/6.
inline std::vector<eval::ItemRecord> routing_ten() {
  using cogpred::CognitiveLevel;
  using cogpred::RoutingCategory;
  const std::array<CognitiveLevel, 10> gold = {CognitiveLevel::kRem, CognitiveLevel::kRem, CognitiveLevel::kUnd,
                                               CognitiveLevel::kUnd, CognitiveLevel::kApp, CognitiveLevel::kApp,
                                               CognitiveLevel::kAna, CognitiveLevel::kAna, CognitiveLevel::kEva,
                                               CognitiveLevel::kEva};
  const std::array<RoutingCategory, 10> pred = {RoutingCategory::kLow,  RoutingCategory::kHigh, RoutingCategory::kLow,
                                                RoutingCategory::kLow,  RoutingCategory::kHigh, RoutingCategory::kLow,
                                                RoutingCategory::kHigh, RoutingCategory::kHigh, RoutingCategory::kLow,
                                                RoutingCategory::kHigh};
  std::vector<eval::ItemRecord> out;
  for (std::size_t i = 0; i < 10; ++i) {
    auto r = record("r" + std::to_string(i), gold[i], true, true);
    r.predicted_category = pred[i];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cograg::testing_support
