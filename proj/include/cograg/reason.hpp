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
#include <variant>
#include <vector>

#include <json.hpp>

#include "cograg/cogpred.hpp"
#include "cograg/llm.hpp"
#include "cograg/question.hpp"
#include "cograg/retrieval.hpp"

namespace cograg::reason {

/// Proof for recall and comprehension questions.
struct LowProof {
  std::string key_fact;               ///< exactly one sentence
  std::vector<std::string> evidence;  ///< >= 1 point
  std::string elimination;            ///< <= 3 sentences
  char answer = 'A';

  bool operator==(const LowProof&) const = default;
};

/// Proof for application, analysis and evaluation questions.
struct HighProof {
  std::vector<std::string> assumptions;     ///< >= 1
  std::vector<std::string> rules;           ///< 2..5
  std::vector<std::string> application;     ///< >= 1 ordered step
  std::map<char, std::string> comparison;   ///< exactly A..D
  char answer = 'A';

  bool operator==(const HighProof&) const = default;
};

using Proof = std::variant<LowProof, HighProof>;

inline constexpr std::size_t kMinRules = 2;
inline constexpr std::size_t kMaxRules = 5;
inline constexpr std::size_t kMaxEliminationSentences = 3;

char proof_answer(const Proof& p);
cogpred::RoutingCategory proof_schema(const Proof& p);

/// Wire form: object with "schema" ("LOW"/"HIGH") followed by the schema's
/// fields in declaration order.
nlohmann::ordered_json to_json(const Proof& p);
std::string serialize(const Proof& p);

/// Builds a proof of the expected schema from a parsed object, enforcing
/// every field constraint. Throws Errc::kSchema describing the violation.
Proof proof_from_json(const nlohmann::json& obj, cogpred::RoutingCategory expected);

/// parse_structured_block + proof_from_json; parse failures become
/// Errc::kSchema as well.
Proof parse_proof(std::string_view reply, cogpred::RoutingCategory expected);

struct SolveResult {
  Proof proof;
  char answer = 'A';
};

struct SolveContext {
  std::optional<cogpred::CognitiveLevel> level;
  int max_new_tokens = llm::kDefaultMaxNewTokens;
};

/// Prompts for the category's schema (stage "solve"); on a violation sends
/// one repair prompt quoting the error. Throws Errc::kSchema afterwards;
/// the error text carries the last raw reply via `last_reply`.
SolveResult solve(const std::string& stem, const Options& options,
                  const retrieval::EvidenceBlock& evidence, cogpred::RoutingCategory category,
                  llm::ChatProvider& provider, const SolveContext& ctx = {},
                  std::string* last_reply = nullptr,
                  const cogpred::PromptRegistry& prompts = cogpred::PromptRegistry::builtin());

enum class Stance { kSupported, kUnsupported, kNeutral };

/// Reads a comparison verdict ("supported: ...", "incorrect because ...").
Stance classify_verdict(std::string_view verdict);

struct ConsistencyResult {
  bool consistent = true;
  bool deterministic_ok = true;
  std::optional<bool> verifier;   ///< set when the verifier answered
  bool verifier_unparsed = false;
};

/// Structural check, optionally conjoined with a yes/no verifier call
/// (stage "verify"). `provider == nullptr` disables the verifier.
ConsistencyResult check_consistency(
    const Proof& proof, char answer, llm::ChatProvider* provider,
    const cogpred::PromptRegistry& prompts = cogpred::PromptRegistry::builtin());

/// Asks for one letter grounded in the proof text (stage "reselect"); one
/// retry, then Errc::kReselect.
char reselect(const std::string& proof_text, const std::string& stem, const Options& options,
              llm::ChatProvider& provider,
              const cogpred::PromptRegistry& prompts = cogpred::PromptRegistry::builtin());

enum class Status { kAnswered, kUnanswered };

struct Outcome {
  Status status = Status::kUnanswered;
  std::optional<char> letter;
  std::optional<Proof> proof;
  bool reselected = false;
};

/// Inputs gathered while answering one question.
struct Attempt {
  std::optional<SolveResult> solved;       ///< schema-valid proof, if any
  std::optional<bool> consistent;          ///< check result when solved
  std::optional<char> reselected_letter;   ///< reselect output, if it succeeded
  std::optional<char> direct_letter;       ///< letter from a non-proof answer path
};

/// ANSWERED when any stage produced a valid letter. Precedence: a
/// reselected letter when the proof was inconsistent or missing, otherwise
/// the solver's answer, otherwise a direct letter.
Outcome classify_outcome(const Attempt& attempt);

}  // namespace cograg::reason
