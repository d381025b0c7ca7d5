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

#include "cograg/exam.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cograg/error.hpp"
#include "cograg/text.hpp"

namespace cograg::eval {

std::string_view mode_name(Mode m) { return m == Mode::kSingle ? "Single" : "Scenario"; }

namespace {

struct RawItem {
  ExamItem item;
  std::optional<std::string> case_text;
};

std::string id_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(Errc::kData, "id must be text or integer");
}

}  // namespace

std::vector<ExamItem> parse_exam(std::string_view jsonl, std::optional<Mode> only) {
  std::vector<RawItem> raw;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto fail = [&](const std::string& what) -> Error {
      return Error(Errc::kData, "exam line " + std::to_string(lineno) + ": " + what);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw fail("malformed record");
    }
    RawItem r;
    try {
      for (const char* f : {"id", "mode", "stem", "options", "gold", "level"}) {
        if (!j.contains(f)) throw fail(std::string("missing field '") + f + "'");
      }
      r.item.id = id_text(j["id"]);
      std::string mode = text::to_lower(j["mode"].get<std::string>());
      if (mode == "single") {
        r.item.mode = Mode::kSingle;
      } else if (mode == "scenario") {
        r.item.mode = Mode::kScenario;
      } else {
        throw fail("unknown mode '" + j["mode"].get<std::string>() + "'");
      }
      r.item.stem = j["stem"].get<std::string>();
      const auto& opts = j["options"];
      if (!opts.is_array() || opts.size() != 4) throw fail("options must hold exactly 4 entries");
      for (std::size_t i = 0; i < 4; ++i) r.item.options[i] = opts[i].get<std::string>();
      std::string gold = text::trim(j["gold"].get<std::string>());
      if (gold.size() != 1 || !is_letter(gold[0])) throw fail("invalid gold letter '" + gold + "'");
      r.item.gold = gold[0];
      auto level = cogpred::parse_level_code(j["level"].get<std::string>());
      if (!level) throw fail("unknown level '" + j["level"].get<std::string>() + "'");
      r.item.level = *level;
      if (j.contains("scenario_group") && !j["scenario_group"].is_null()) {
        r.item.scenario_group = id_text(j["scenario_group"]);
      }
      if (j.contains("case_text") && j["case_text"].is_string()) {
        r.case_text = j["case_text"].get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("bad field type (") + e.what() + ")");
    }
    if (text::trim(r.item.stem).empty()) throw fail("empty stem");
    raw.push_back(std::move(r));
  }

  std::map<std::string, std::string> case_by_group;
  for (const auto& r : raw) {
    if (r.item.scenario_group && r.case_text && !case_by_group.contains(*r.item.scenario_group)) {
      case_by_group[*r.item.scenario_group] = *r.case_text;
    }
  }
  std::vector<ExamItem> out;
  for (auto& r : raw) {
    std::optional<std::string> case_text = r.case_text;
    if (r.item.scenario_group) {
      if (auto it = case_by_group.find(*r.item.scenario_group); it != case_by_group.end()) {
        case_text = it->second;
      }
    }
    if (case_text && !text::trim(*case_text).empty()) {
      r.item.stem = *case_text + "\n\n" + r.item.stem;
    }
    if (!only || r.item.mode == *only) out.push_back(std::move(r.item));
  }
  return out;
}

std::vector<ExamItem> load_exam(const std::string& path, std::optional<Mode> only) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kData, "cannot open exam file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_exam(ss.str(), only);
}

}  // namespace cograg::eval
