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

#include "cograg/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cograg/error.hpp"

namespace cograg::eval {

using cogpred::CognitiveLevel;
using cogpred::RoutingCategory;

namespace {

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> percent_opt(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return percent(num, den);
}

std::size_t level_index(CognitiveLevel l) { return static_cast<std::size_t>(l); }

}  // namespace

EvalReport compute_report(const std::vector<ItemRecord>& records) {
  if (records.empty()) throw Error(Errc::kData, "cannot compute a report over zero records");
  EvalReport r;
  r.item_count = records.size();
  std::array<std::size_t, 5> level_correct{};
  std::size_t hit = 0, low_total = 0, low_hit = 0, high_total = 0, high_hit = 0;

  for (const auto& rec : records) {
    bool answered = rec.outcome.status == reason::Status::kAnswered;
    bool correct = answered && rec.correct;
    std::size_t li = level_index(rec.gold_level);
    ++r.level_counts[li];
    if (correct) {
      ++r.correct_count;
      ++level_correct[li];
    }
    if (!answered) ++r.unanswered_count;
    if (rec.triggered()) {
      ++r.trigger_count;
      if (correct && rec.judge_top1 && *rec.judge_top1 != rec.gold) ++r.corrected_after_trigger;
    }
    if (rec.level_defaulted) ++r.defaulted_level_predictions;
    if (rec.tags_defaulted) ++r.defaulted_tag_predictions;
    if (rec.predicted_category) {
      ++r.routing_evaluated;
      RoutingCategory gold = cogpred::consolidate(rec.gold_level);
      bool h = *rec.predicted_category == gold;
      hit += h ? 1 : 0;
      if (gold == RoutingCategory::kLow) {
        ++low_total;
        low_hit += h ? 1 : 0;
      } else {
        ++high_total;
        high_hit += h ? 1 : 0;
      }
    }
    r.items.push_back({rec.id, rec.gold_level, answered, rec.outcome.letter, correct,
                       rec.triggered()});
  }

  r.overall = percent(r.correct_count, r.item_count);
  double sum = 0;
  std::size_t strata = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    r.per_level[i] = percent_opt(level_correct[i], r.level_counts[i]);
    if (r.per_level[i]) {
      sum += *r.per_level[i];
      ++strata;
    } else {
      r.empty_strata.emplace_back(cogpred::level_code(cogpred::kAllLevels[i]));
    }
  }
  r.macro = sum / static_cast<double>(strata);
  r.unanswered_rate = percent(r.unanswered_count, r.item_count);
  r.trigger_rate = percent(r.trigger_count, r.item_count);
  r.routing_hit_overall = percent_opt(hit, r.routing_evaluated);
  r.routing_hit_low = percent_opt(low_hit, low_total);
  r.routing_hit_high = percent_opt(high_hit, high_total);
  return r;
}

std::string format_one_decimal(double value) {
  double rounded = std::floor(value * 10.0 + 0.5 + 1e-9) / 10.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", rounded);
  return buf;
}

namespace {

std::string opt_pct(const std::optional<double>& v) { return v ? format_one_decimal(*v) : "-"; }

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["item_count"] = r.item_count;
  j["correct_count"] = r.correct_count;
  j["overall"] = r.overall;
  j["macro"] = r.macro;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < 5; ++i) {
    std::string code(cogpred::level_code(cogpred::kAllLevels[i]));
    per[code] = opt_json(r.per_level[i]);
    counts[code] = r.level_counts[i];
  }
  j["per_level"] = per;
  j["level_counts"] = counts;
  j["empty_strata"] = r.empty_strata;
  j["unanswered_count"] = r.unanswered_count;
  j["unanswered_rate"] = r.unanswered_rate;
  j["trigger_count"] = r.trigger_count;
  j["trigger_rate"] = r.trigger_rate;
  j["corrected_after_trigger"] = r.corrected_after_trigger;
  j["routing_evaluated"] = r.routing_evaluated;
  j["routing_hit_rates"] = {{"overall", opt_json(r.routing_hit_overall)},
                            {"low", opt_json(r.routing_hit_low)},
                            {"high", opt_json(r.routing_hit_high)}};
  j["defaulted_level_predictions"] = r.defaulted_level_predictions;
  j["defaulted_tag_predictions"] = r.defaulted_tag_predictions;
  auto items = nlohmann::ordered_json::array();
  for (const auto& it : r.items) {
    items.push_back({{"id", it.id},
                     {"level", cogpred::level_code(it.level)},
                     {"status", it.answered ? "ANSWERED" : "UNANSWERED"},
                     {"answer", it.answer ? nlohmann::ordered_json(std::string(1, *it.answer))
                                          : nlohmann::ordered_json(nullptr)},
                     {"correct", it.correct},
                     {"triggered", it.triggered}});
  }
  j["items"] = items;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.item_count = j.at("item_count").get<std::size_t>();
    r.correct_count = j.at("correct_count").get<std::size_t>();
    r.overall = j.at("overall").get<double>();
    r.macro = j.at("macro").get<double>();
    for (std::size_t i = 0; i < 5; ++i) {
      std::string code(cogpred::level_code(cogpred::kAllLevels[i]));
      r.per_level[i] = opt_from(j.at("per_level").at(code));
      r.level_counts[i] = j.at("level_counts").at(code).get<std::size_t>();
    }
    r.empty_strata = j.at("empty_strata").get<std::vector<std::string>>();
    r.unanswered_count = j.at("unanswered_count").get<std::size_t>();
    r.unanswered_rate = j.at("unanswered_rate").get<double>();
    r.trigger_count = j.at("trigger_count").get<std::size_t>();
    r.trigger_rate = j.at("trigger_rate").get<double>();
    r.corrected_after_trigger = j.at("corrected_after_trigger").get<std::size_t>();
    r.routing_evaluated = j.at("routing_evaluated").get<std::size_t>();
    const auto& hits = j.at("routing_hit_rates");
    r.routing_hit_overall = opt_from(hits.at("overall"));
    r.routing_hit_low = opt_from(hits.at("low"));
    r.routing_hit_high = opt_from(hits.at("high"));
    r.defaulted_level_predictions = j.at("defaulted_level_predictions").get<std::size_t>();
    r.defaulted_tag_predictions = j.at("defaulted_tag_predictions").get<std::size_t>();
    for (const auto& it : j.at("items")) {
      ItemSummary s;
      s.id = it.at("id").get<std::string>();
      auto level = cogpred::parse_level_code(it.at("level").get<std::string>());
      if (!level) throw Error(Errc::kData, "report item has an unknown level");
      s.level = *level;
      s.answered = it.at("status").get<std::string>() == "ANSWERED";
      if (!it.at("answer").is_null()) s.answer = it.at("answer").get<std::string>().at(0);
      s.correct = it.at("correct").get<bool>();
      s.triggered = it.at("triggered").get<bool>();
      r.items.push_back(std::move(s));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kData, std::string("malformed report: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw Error(Errc::kData, std::string("malformed report: ") + e.what());
  }
}

std::string emit_report(const EvalReport& r, ReportFormat format) {
  if (format == ReportFormat::kMachine) return report_to_json(r).dump(2) + "\n";
  std::ostringstream out;
  out << "Overall Macro Rem. Und. App. Ana. Eva.\n";
  out << format_one_decimal(r.overall) << ' ' << format_one_decimal(r.macro);
  for (const auto& v : r.per_level) out << ' ' << opt_pct(v);
  out << '\n';
  out << "items: " << r.item_count << '\n';
  out << "unanswered: " << format_one_decimal(r.unanswered_rate) << "% (" << r.unanswered_count
      << ")\n";
  out << "trigger rate: " << format_one_decimal(r.trigger_rate) << "% (" << r.trigger_count
      << "), corrected after trigger: " << r.corrected_after_trigger << '\n';
  if (r.routing_evaluated > 0) {
    out << "routing hit: overall " << opt_pct(r.routing_hit_overall) << ", LOW "
        << opt_pct(r.routing_hit_low) << ", HIGH " << opt_pct(r.routing_hit_high) << '\n';
  }
  if (r.defaulted_level_predictions + r.defaulted_tag_predictions > 0) {
    out << "defaulted predictions: level " << r.defaulted_level_predictions << ", tags "
        << r.defaulted_tag_predictions << '\n';
  }
  if (!r.empty_strata.empty()) {
    out << "empty strata excluded from macro:";
    for (const auto& s : r.empty_strata) out << ' ' << s;
    out << '\n';
  }
  return out.str();
}

}  // namespace cograg::eval
