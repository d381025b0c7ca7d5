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

#include <json.hpp>

#include "cograg/cogpred.hpp"
#include "cograg/exam.hpp"
#include "cograg/judge.hpp"
#include "cograg/kb.hpp"
#include "cograg/llm.hpp"
#include "cograg/reason.hpp"
#include "cograg/retrieval.hpp"

namespace cograg::eval {

enum class Method { kBaseline, kBm25, kDense, kHybrid, kCograg, kCogragPlus };

std::string_view method_name(Method m);
/// "baseline", "bm25", "dense", "hybrid", "cograg", "cograg_plus" (also
/// "cograg+"); case-insensitive.
std::optional<Method> parse_method(std::string_view s);

struct RunConfig {
  Method method = Method::kCogragPlus;
  int alpha = judge::kDefaultAlpha;
  int beta = judge::kDefaultBeta;
  std::size_t top_k = retrieval::kDefaultTopK;
  std::size_t budget = 1024;
  bool rr_enabled = true;
  bool cr_enabled = true;
  bool standard_cot = false;
  bool cog_injection = true;
  bool few_shot_level = true;
  bool direct_binary = false;
  bool verifier = true;
  int answer_max_tokens = llm::kDefaultMaxNewTokens;
  int proof_max_tokens = llm::kDefaultMaxNewTokens;
  std::size_t workers = 4;

  /// Method defaults: COGRAG_PLUS turns on RR, CR and the verifier; the
  /// retrieval baselines run without cognitive injection.
  static RunConfig for_method(Method m);
};

/// Shared read-only inputs of a run.
struct Resources {
  const kb::KnowledgeBase* kb = nullptr;
  const retrieval::Bm25Index* bm25 = nullptr;
  llm::Embedder* embedder = nullptr;
  const cogpred::PromptRegistry* prompts = &cogpred::PromptRegistry::builtin();
  text::TokenCounter counter = text::whitespace_token_count;
};

/// Everything decided while answering one item.
struct ItemRecord {
  std::string id;
  Mode mode = Mode::kSingle;
  char gold = 'A';
  cogpred::CognitiveLevel gold_level = cogpred::CognitiveLevel::kRem;

  std::optional<cogpred::CognitiveLevel> predicted_level;
  std::optional<cogpred::RoutingCategory> predicted_category;
  bool level_defaulted = false;
  std::optional<kb::TagSet> tags;
  bool tags_defaulted = false;

  std::size_t retrieval_calls = 0;
  std::vector<std::string> retrieval_queries;
  std::vector<kb::EntryId> evidence_ids;  ///< E1
  std::size_t evidence_tokens = 0;

  std::optional<judge::JudgeVerdict> verdict;
  bool judge_failed = false;
  std::optional<judge::TriggerDecision> trigger;
  std::optional<char> judge_top1;
  bool remediated = false;
  bool remediation_failed = false;
  std::vector<kb::EntryId> final_evidence_ids;  ///< E2 when remediated
  std::size_t final_evidence_tokens = 0;

  std::optional<bool> consistent;
  bool verifier_unparsed = false;
  reason::Outcome outcome;
  bool correct = false;
  std::vector<std::string> errors;
  std::vector<llm::CallRecord> calls;

  bool triggered() const { return trigger && trigger->triggered; }
  std::size_t stage_calls(std::string_view stage) const;
};

ItemRecord run_item(const ExamItem& item, const RunConfig& config, const Resources& res,
                    llm::ChatProvider& provider);

/// Runs items on a bounded worker pool; records come back in item order.
/// Item outcomes are appended to `log` after all workers finish.
std::vector<ItemRecord> run_all(const std::vector<ExamItem>& items, const RunConfig& config,
                                const Resources& res, llm::ChatProvider& provider,
                                llm::RunLog* log = nullptr);

nlohmann::ordered_json to_json(const ItemRecord& r, bool with_calls = true);

}  // namespace cograg::eval
