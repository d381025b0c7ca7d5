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

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "cograg/kb.hpp"
#include "cograg/llm.hpp"
#include "cograg/question.hpp"
#include "cograg/retrieval.hpp"

namespace cograg::cogpred {

/// Bloom levels used for routing; Create never occurs.
enum class CognitiveLevel { kRem, kUnd, kApp, kAna, kEva };

inline constexpr std::array<CognitiveLevel, 5> kAllLevels = {
    CognitiveLevel::kRem, CognitiveLevel::kUnd, CognitiveLevel::kApp, CognitiveLevel::kAna,
    CognitiveLevel::kEva};

enum class RoutingCategory { kLow, kHigh };

std::string_view level_code(CognitiveLevel l);   // "Rem"
std::string_view level_name(CognitiveLevel l);   // "Remember"
std::string_view category_name(RoutingCategory c);  // "LOW"
/// Accepts codes ("Ana") and full names ("Analyze"), case-insensitive.
std::optional<CognitiveLevel> parse_level_code(std::string_view s);
std::optional<RoutingCategory> parse_category(std::string_view s);

/// {Rem, Und} -> LOW; {App, Ana, Eva} -> HIGH.
constexpr RoutingCategory consolidate(CognitiveLevel l) {
  return l == CognitiveLevel::kRem || l == CognitiveLevel::kUnd ? RoutingCategory::kLow
                                                                : RoutingCategory::kHigh;
}

/// Named prompt templates, loaded from a text file of "### name" sections.
class PromptRegistry {
 public:
  /// Parses the registry format; throws Errc::kParameter if a required
  /// template is missing.
  static PromptRegistry parse(std::string_view source);
  static PromptRegistry from_file(const std::string& path);
  /// Templates compiled into the binary.
  static const PromptRegistry& builtin();

  const std::string& get(std::string_view name) const;
  bool contains(std::string_view name) const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

std::string_view builtin_registry_source();

/// Level name search in a reply; earliest match wins.
std::optional<CognitiveLevel> parse_level_reply(std::string_view reply);

struct LevelPrediction {
  std::optional<CognitiveLevel> level;  ///< empty in direct-binary mode
  RoutingCategory category = RoutingCategory::kLow;
  bool defaulted = false;
};

/// Asks the provider for one of the five levels (stage "level"); one retry,
/// then falls back to Und with `defaulted` set.
LevelPrediction predict_level(const std::string& stem, const Options& options,
                              llm::ChatProvider& provider, bool few_shot,
                              const PromptRegistry& prompts = PromptRegistry::builtin());

/// Direct LOW/HIGH prediction (stage "binary"); falls back to LOW, flagged.
LevelPrediction predict_binary(const std::string& stem, const Options& options,
                               llm::ChatProvider& provider, bool few_shot,
                               const PromptRegistry& prompts = PromptRegistry::builtin());

struct TagPrediction {
  kb::TagSet tags;
  bool defaulted = false;
};

/// Topic tags for retrieval (stage "tags"); no parseable code -> all tags.
TagPrediction predict_tags(const std::string& stem, const Options& options,
                           llm::ChatProvider& provider,
                           const PromptRegistry& prompts = PromptRegistry::builtin());

const std::string& select_system_prompt(RoutingCategory category,
                                        const PromptRegistry& prompts = PromptRegistry::builtin());

struct PromptPair {
  std::string system;
  std::string user;

  bool operator==(const PromptPair&) const = default;
};

/// "Cognitive Level: Analyze" (or the category name when only the category
/// is known).
std::string level_tag_line(std::optional<CognitiveLevel> level, RoutingCategory category);

/// Sections for template rendering: level line, evidence section (empty
/// when there is no evidence), stem and labelled options.
std::vector<std::pair<std::string, std::string>> question_vars(
    std::optional<std::string> level_line, const std::string& stem, const Options& options,
    const retrieval::EvidenceBlock& evidence);

/// Level-conditioned prompts: the category's system template and a user
/// prompt with, in order, the level tag, evidence, stem, options and the
/// answer-format instruction.
PromptPair compose_prompts(RoutingCategory category, std::optional<CognitiveLevel> level,
                           const std::string& stem, const Options& options,
                           const retrieval::EvidenceBlock& evidence,
                           const PromptRegistry& prompts = PromptRegistry::builtin());

/// Prompts without cognitive conditioning (baselines).
PromptPair compose_plain_prompts(const std::string& stem, const Options& options,
                                 const retrieval::EvidenceBlock& evidence,
                                 const PromptRegistry& prompts = PromptRegistry::builtin());

}  // namespace cograg::cogpred
