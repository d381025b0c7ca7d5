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

#include "cograg/cogpred.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "cograg/error.hpp"
#include "cograg/text.hpp"

namespace cograg::cogpred {

namespace {

struct LevelInfo {
  CognitiveLevel level;
  std::string_view code;
  std::string_view name;
  std::string_view stem;  // matched inside replies
};

constexpr std::array<LevelInfo, 5> kLevelInfo = {{
    {CognitiveLevel::kRem, "Rem", "Remember", "remember"},
    {CognitiveLevel::kUnd, "Und", "Understand", "understand"},
    {CognitiveLevel::kApp, "App", "Apply", "apply"},
    {CognitiveLevel::kAna, "Ana", "Analyze", "analy"},
    {CognitiveLevel::kEva, "Eva", "Evaluate", "evaluat"},
}};

constexpr std::array<std::string_view, 11> kRequiredTemplates = {
    "sys_base",  "sys_low", "sys_high", "user_main", "fewshot_levels", "level_predict",
    "judge_rubric", "rr_low", "rr_high", "solve_low", "solve_high"};

const LevelInfo& info(CognitiveLevel l) { return kLevelInfo[static_cast<std::size_t>(l)]; }

}  // namespace

std::string_view level_code(CognitiveLevel l) { return info(l).code; }
std::string_view level_name(CognitiveLevel l) { return info(l).name; }
std::string_view category_name(RoutingCategory c) {
  return c == RoutingCategory::kLow ? "LOW" : "HIGH";
}

std::optional<CognitiveLevel> parse_level_code(std::string_view s) {
  std::string lower = text::to_lower(text::trim(s));
  for (const auto& li : kLevelInfo) {
    if (lower == text::to_lower(li.code) || lower == text::to_lower(li.name)) return li.level;
  }
  if (lower == "analyse") return CognitiveLevel::kAna;
  return std::nullopt;
}

std::optional<RoutingCategory> parse_category(std::string_view s) {
  std::string lower = text::to_lower(text::trim(s));
  if (lower == "low") return RoutingCategory::kLow;
  if (lower == "high") return RoutingCategory::kHigh;
  return std::nullopt;
}

// ---------------------------------------------------------------- registry

PromptRegistry PromptRegistry::parse(std::string_view source) {
  PromptRegistry reg;
  std::istringstream in{std::string(source)};
  std::string line;
  std::string name;
  std::string body;
  auto flush = [&] {
    if (name.empty()) return;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    reg.templates_[name] = body;
  };
  while (std::getline(in, line)) {
    if (line.rfind("### ", 0) == 0) {
      flush();
      name = text::trim(std::string_view(line).substr(4));
      body.clear();
    } else if (!name.empty()) {
      body += line;
      body += '\n';
    }
  }
  flush();
  for (auto required : kRequiredTemplates) {
    if (!reg.contains(required)) {
      throw Error(Errc::kParameter, "prompt registry lacks template '" + std::string(required) + "'");
    }
  }
  return reg;
}

PromptRegistry PromptRegistry::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kParameter, "cannot open prompt registry " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const PromptRegistry& PromptRegistry::builtin() {
  static const PromptRegistry reg = parse(builtin_registry_source());
  return reg;
}

const std::string& PromptRegistry::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(Errc::kParameter, "unknown prompt template '" + std::string(name) + "'");
  }
  return it->second;
}

bool PromptRegistry::contains(std::string_view name) const {
  return templates_.find(name) != templates_.end();
}

// ---------------------------------------------------------------- prediction

std::optional<CognitiveLevel> parse_level_reply(std::string_view reply) {
  std::string lower = text::to_lower(reply);
  std::optional<CognitiveLevel> best;
  std::size_t best_pos = std::string::npos;
  for (const auto& li : kLevelInfo) {
    std::size_t pos = lower.find(li.stem);
    if (pos != std::string::npos && pos < best_pos) {
      best_pos = pos;
      best = li.level;
    }
  }
  return best;
}

namespace {

std::string predictor_prompt(std::string_view tmpl_name, const std::string& stem,
                             const Options& options, bool few_shot,
                             const PromptRegistry& prompts) {
  std::string fewshot = few_shot ? prompts.get("fewshot_levels") + "\n" : std::string();
  return text::render(prompts.get(tmpl_name),
                      {{"fewshot", fewshot}, {"stem", stem}, {"options", render_options(options)}});
}

}  // namespace

LevelPrediction predict_level(const std::string& stem, const Options& options,
                              llm::ChatProvider& provider, bool few_shot,
                              const PromptRegistry& prompts) {
  llm::ChatRequest req("", predictor_prompt("level_predict", stem, options, few_shot, prompts),
                       "level");
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto resp = provider.complete(req);
    if (auto level = parse_level_reply(resp.text)) {
      return {level, consolidate(*level), false};
    }
  }
  return {CognitiveLevel::kUnd, consolidate(CognitiveLevel::kUnd), true};
}

LevelPrediction predict_binary(const std::string& stem, const Options& options,
                               llm::ChatProvider& provider, bool few_shot,
                               const PromptRegistry& prompts) {
  std::string tmpl = prompts.contains("binary_predict") ? "binary_predict" : "level_predict";
  llm::ChatRequest req("", predictor_prompt(tmpl, stem, options, few_shot, prompts), "binary");
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto resp = provider.complete(req);
    for (const auto& tok : text::tokenize(resp.text)) {
      if (tok == "low") return {std::nullopt, RoutingCategory::kLow, false};
      if (tok == "high") return {std::nullopt, RoutingCategory::kHigh, false};
    }
  }
  return {std::nullopt, RoutingCategory::kLow, true};
}

TagPrediction predict_tags(const std::string& stem, const Options& options,
                           llm::ChatProvider& provider, const PromptRegistry& prompts) {
  std::string tmpl = prompts.contains("tag_predict") ? prompts.get("tag_predict") : std::string(
      "Assign topic codes T1-T6 to the question.\nQuestion: {{stem}}\nOptions:\n{{options}}");
  llm::ChatRequest req(
      "", text::render(tmpl, {{"stem", stem}, {"options", render_options(options)}}), "tags");
  auto resp = provider.complete(req);
  kb::TagSet tags;
  const std::string& s = resp.text;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if ((s[i] == 'T' || s[i] == 't') && s[i + 1] >= '1' && s[i + 1] <= '6') {
      bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]));
      bool right_ok = i + 2 >= s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 2]));
      if (left_ok && right_ok) tags.insert(static_cast<kb::Tag>(s[i + 1] - '1'));
    }
  }
  if (tags.empty()) return {kb::TagSet::all(), true};
  return {tags, false};
}

// ---------------------------------------------------------------- prompts

const std::string& select_system_prompt(RoutingCategory category, const PromptRegistry& prompts) {
  return prompts.get(category == RoutingCategory::kLow ? "sys_low" : "sys_high");
}

std::string level_tag_line(std::optional<CognitiveLevel> level, RoutingCategory category) {
  if (level) return "Cognitive Level: " + std::string(level_name(*level));
  return "Cognitive Level: " + std::string(category_name(category));
}

std::vector<std::pair<std::string, std::string>> question_vars(
    std::optional<std::string> level_line, const std::string& stem, const Options& options,
    const retrieval::EvidenceBlock& evidence) {
  std::string evidence_section;
  if (!evidence.empty()) evidence_section = "Evidence:\n" + evidence.render() + "\n\n";
  return {{"level_line", level_line ? *level_line + "\n\n" : std::string()},
          {"evidence_section", evidence_section},
          {"stem", stem},
          {"options", render_options(options)}};
}

PromptPair compose_prompts(RoutingCategory category, std::optional<CognitiveLevel> level,
                           const std::string& stem, const Options& options,
                           const retrieval::EvidenceBlock& evidence,
                           const PromptRegistry& prompts) {
  auto vars = question_vars(level_tag_line(level, category), stem, options, evidence);
  return {select_system_prompt(category, prompts), text::render(prompts.get("user_main"), vars)};
}

PromptPair compose_plain_prompts(const std::string& stem, const Options& options,
                                 const retrieval::EvidenceBlock& evidence,
                                 const PromptRegistry& prompts) {
  auto vars = question_vars(std::nullopt, stem, options, evidence);
  return {prompts.get("sys_base"), text::render(prompts.get("user_main"), vars)};
}

}  // namespace cograg::cogpred
