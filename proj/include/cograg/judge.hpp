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
#include <utility>
#include <vector>

#include "cograg/cogpred.hpp"
#include "cograg/kb.hpp"
#include "cograg/llm.hpp"
#include "cograg/question.hpp"
#include "cograg/retrieval.hpp"

namespace cograg::judge {

enum class Target { kCorrect, kIncorrect };

struct JudgeVerdict {
  int rel = 0;
  std::array<int, 4> support{};  ///< A, B, C, D
  Target target = Target::kCorrect;
  bool target_defaulted = false;

  bool operator==(const JudgeVerdict&) const = default;
};

inline constexpr int kDefaultAlpha = 50;
inline constexpr int kDefaultBeta = 35;
inline constexpr std::size_t kRemediationTopK = 3;
inline constexpr double kRedundancyThreshold = 0.90;
inline constexpr std::size_t kFactQueryCount = 3;
inline constexpr std::size_t kOptionQueryMax = 4;

/// Parses the judge's structured reply; values are clamped to [0, 100].
/// Throws Errc::kJudge if rel or a four-value support array is missing.
JudgeVerdict parse_verdict(std::string_view reply);

/// Audits evidence (stage "judge"); one retry, then Errc::kJudge.
JudgeVerdict judge(const std::string& stem, const Options& options,
                   const retrieval::EvidenceBlock& evidence, llm::ChatProvider& provider,
                   const cogpred::PromptRegistry& prompts = cogpred::PromptRegistry::builtin());

struct TopTwo {
  int s1 = 0;
  int s2 = 0;
  int margin = 0;
  std::pair<char, char> letters{'A', 'B'};

  bool operator==(const TopTwo&) const = default;
};

/// Ranks support (or 100 - support when the question asks for the
/// exception) and returns the two leaders; ties go to the earlier letter.
TopTwo top_two_margin(const JudgeVerdict& verdict);

enum class TriggerReason { kNone, kRelevance, kMargin };

std::string_view reason_name(TriggerReason r);

struct TriggerDecision {
  bool triggered = false;
  TriggerReason reason = TriggerReason::kNone;
  TopTwo top_two;
};

/// Fires when rel < alpha or margin < beta; relevance is reported first.
TriggerDecision should_trigger(const JudgeVerdict& verdict, int alpha = kDefaultAlpha,
                               int beta = kDefaultBeta);

/// Lines of a numbered (or bulleted) list, case-insensitively deduplicated.
std::vector<std::string> parse_query_list(std::string_view reply);

/// Broad fact-gathering queries for low-order questions (stage "rr_low").
std::vector<std::string> fact_centric_queries(
    const std::string& stem, const Options& options, llm::ChatProvider& provider,
    const cogpred::PromptRegistry& prompts = cogpred::PromptRegistry::builtin());

/// Discriminative queries over the two leading options (stage "rr_high").
/// Queries that mention neither option's key terms are discarded.
std::vector<std::string> option_centric_queries(
    const std::string& stem, std::pair<char, char> top_two, const Options& options,
    llm::ChatProvider& provider,
    const cogpred::PromptRegistry& prompts = cogpred::PromptRegistry::builtin());

/// Lowercase content words of an option text.
std::vector<std::string> key_terms(const std::string& option_text);

struct RemediationContext {
  const kb::KnowledgeBase& kb;
  llm::Embedder& embedder;
  kb::TagSet tags;
  std::size_t budget = 1024;
  text::TokenCounter counter = text::whitespace_token_count;
};

struct ReinforceResult {
  retrieval::EvidenceBlock evidence;  ///< E2
  std::vector<std::string> queries;
  bool failed = false;  ///< remediation error; evidence is E1
  std::string error;
};

/// Drops snippets whose entry embedding has cosine >= threshold with an
/// earlier kept snippet (same entry counts as identical).
std::vector<retrieval::Snippet> filter_redundant(std::vector<retrieval::Snippet> snippets,
                                                 const kb::KnowledgeBase& kb,
                                                 double threshold = kRedundancyThreshold);

/// Routes to the fact-centric (LOW) or option-centric (HIGH) path, retrieves
/// per query under the tag constraint, merges new snippets after E1,
/// filters redundancy and re-applies the budget.
ReinforceResult reinforce(const std::string& stem, const Options& options,
                          const JudgeVerdict& verdict, cogpred::RoutingCategory category,
                          const retrieval::EvidenceBlock& e1, const RemediationContext& ctx,
                          llm::ChatProvider& provider,
                          const cogpred::PromptRegistry& prompts = cogpred::PromptRegistry::builtin());

}  // namespace cograg::judge
