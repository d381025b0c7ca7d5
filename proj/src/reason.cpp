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

#include "cograg/reason.hpp"

#include <set>

#include "cograg/error.hpp"
#include "cograg/text.hpp"

namespace cograg::reason {

using cogpred::RoutingCategory;

char proof_answer(const Proof& p) {
  return std::visit([](const auto& x) { return x.answer; }, p);
}

RoutingCategory proof_schema(const Proof& p) {
  return std::holds_alternative<LowProof>(p) ? RoutingCategory::kLow : RoutingCategory::kHigh;
}

nlohmann::ordered_json to_json(const Proof& p) {
  nlohmann::ordered_json j;
  if (const auto* low = std::get_if<LowProof>(&p)) {
    j["schema"] = "LOW";
    j["key_fact"] = low->key_fact;
    j["evidence"] = low->evidence;
    j["elimination"] = low->elimination;
    j["answer"] = std::string(1, low->answer);
  } else {
    const auto& high = std::get<HighProof>(p);
    j["schema"] = "HIGH";
    j["assumptions"] = high.assumptions;
    j["rules"] = high.rules;
    j["application"] = high.application;
    nlohmann::ordered_json cmp = nlohmann::ordered_json::object();
    for (const auto& [letter, verdict] : high.comparison) cmp[std::string(1, letter)] = verdict;
    j["comparison"] = cmp;
    j["answer"] = std::string(1, high.answer);
  }
  return j;
}

std::string serialize(const Proof& p) { return to_json(p).dump(); }

namespace {

[[noreturn]] void violation(const std::string& what) { throw Error(Errc::kSchema, what); }

const nlohmann::json& field(const nlohmann::json& obj, const char* name) {
  if (!obj.contains(name)) violation(std::string("missing field '") + name + "'");
  return obj[name];
}

std::string string_field(const nlohmann::json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_string()) violation(std::string("field '") + name + "' must be text");
  return v.get<std::string>();
}

std::vector<std::string> list_field(const nlohmann::json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_array()) violation(std::string("field '") + name + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) violation(std::string("field '") + name + "' must hold text items");
    auto s = text::trim(item.get<std::string>());
    if (s.empty()) violation(std::string("field '") + name + "' has an empty item");
    out.push_back(std::move(s));
  }
  return out;
}

char answer_field(const nlohmann::json& obj) {
  std::string a = text::trim(string_field(obj, "answer"));
  if (a.size() != 1 || !is_letter(a[0])) {
    violation("answer '" + a + "' is not one of A, B, C, D");
  }
  return a[0];
}

}  // namespace

Proof proof_from_json(const nlohmann::json& obj, RoutingCategory expected) {
  if (!obj.is_object()) violation("proof must be an object");
  std::string expected_name(cogpred::category_name(expected));
  if (obj.contains("schema")) {
    if (!obj["schema"].is_string() || obj["schema"].get<std::string>() != expected_name) {
      violation("schema must be " + expected_name);
    }
  }
  if (expected == RoutingCategory::kLow) {
    LowProof p;
    p.key_fact = text::trim(string_field(obj, "key_fact"));
    if (text::count_terminators(p.key_fact) != 1 || text::split_sentences(p.key_fact).size() != 1) {
      violation("key_fact must be exactly one sentence");
    }
    p.evidence = list_field(obj, "evidence");
    if (p.evidence.empty()) violation("evidence needs at least one point");
    p.elimination = text::trim(string_field(obj, "elimination"));
    if (auto n = text::split_sentences(p.elimination).size(); n > kMaxEliminationSentences) {
      violation("elimination has " + std::to_string(n) + " sentences, at most 3 allowed");
    }
    p.answer = answer_field(obj);
    return p;
  }
  HighProof p;
  p.assumptions = list_field(obj, "assumptions");
  if (p.assumptions.empty()) violation("assumptions needs at least one item");
  p.rules = list_field(obj, "rules");
  if (p.rules.size() < kMinRules || p.rules.size() > kMaxRules) {
    violation("rules count " + std::to_string(p.rules.size()) + " \xE2\x88\x89 [2,5]");
  }
  p.application = list_field(obj, "application");
  if (p.application.empty()) violation("application needs at least one step");
  const auto& cmp = field(obj, "comparison");
  if (!cmp.is_object()) violation("comparison must map option letters to verdicts");
  for (auto it = cmp.begin(); it != cmp.end(); ++it) {
    const std::string& key = it.key();
    if (key.size() != 1 || !is_letter(key[0])) violation("comparison key '" + key + "' is not A-D");
    if (!it.value().is_string()) violation("comparison verdict for " + key + " must be text");
    p.comparison[key[0]] = it.value().get<std::string>();
  }
  if (p.comparison.size() != 4) violation("comparison must cover exactly A, B, C, D");
  p.answer = answer_field(obj);
  return p;
}

Proof parse_proof(std::string_view reply, RoutingCategory expected) {
  nlohmann::json obj;
  try {
    obj = llm::parse_structured_block(reply);
  } catch (const Error& e) {
    violation(e.what());
  }
  return proof_from_json(obj, expected);
}

// ---------------------------------------------------------------- solve

SolveResult solve(const std::string& stem, const Options& options,
                  const retrieval::EvidenceBlock& evidence, RoutingCategory category,
                  llm::ChatProvider& provider, const SolveContext& ctx, std::string* last_reply,
                  const cogpred::PromptRegistry& prompts) {
  auto vars = cogpred::question_vars(cogpred::level_tag_line(ctx.level, category), stem, options,
                                     evidence);
  std::string user = text::render(
      prompts.get(category == RoutingCategory::kLow ? "solve_low" : "solve_high"), vars);
  llm::ChatRequest req(cogpred::select_system_prompt(category, prompts), user, "solve",
                       ctx.max_new_tokens);

  std::string error;
  std::string previous;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) {
      std::string repair = prompts.contains("repair")
                               ? prompts.get("repair")
                               : std::string("Fix the format error: {{error}}\n{{previous}}");
      req.user = user + "\n\n" +
                 text::render(repair, {{"error", error},
                                       {"previous", previous}});
    }
    auto resp = provider.complete(req);
    previous = resp.text;
    if (last_reply != nullptr) *last_reply = resp.text;
    try {
      Proof proof = parse_proof(resp.text, category);
      char a = proof_answer(proof);
      return {std::move(proof), a};
    } catch (const Error& e) {
      error = e.what();
      if (resp.truncated) error += " (generation hit the output budget)";
    }
  }
  throw Error(Errc::kSchema, error);
}

// ---------------------------------------------------------------- consistency

Stance classify_verdict(std::string_view verdict) {
  std::string v = text::to_lower(verdict);
  static const std::array<std::string_view, 10> negative = {
      "unsupported", "not supported", "incorrect", "wrong", "excluded",
      "eliminated",  "false",         "rejected",  "contradict", "does not"};
  static const std::array<std::string_view, 6> positive = {
      "supported", "correct", "true", "best", "consistent", "valid"};
  for (auto n : negative) {
    if (v.find(n) != std::string::npos) return Stance::kUnsupported;
  }
  for (auto p : positive) {
    if (v.find(p) != std::string::npos) return Stance::kSupported;
  }
  return Stance::kNeutral;
}

ConsistencyResult check_consistency(const Proof& proof, char answer, llm::ChatProvider* provider,
                                    const cogpred::PromptRegistry& prompts) {
  ConsistencyResult r;
  if (proof_answer(proof) != answer) r.deterministic_ok = false;
  if (const auto* high = std::get_if<HighProof>(&proof); high != nullptr && r.deterministic_ok) {
    std::vector<char> supported;
    for (const auto& [letter, verdict] : high->comparison) {
      if (classify_verdict(verdict) == Stance::kSupported) supported.push_back(letter);
    }
    auto it = high->comparison.find(answer);
    bool answer_unsupported =
        it != high->comparison.end() && classify_verdict(it->second) == Stance::kUnsupported;
    if (supported.size() == 1 && supported.front() != answer && answer_unsupported) {
      r.deterministic_ok = false;
    }
  }
  r.consistent = r.deterministic_ok;
  if (provider != nullptr) {
    std::string tmpl = prompts.contains("verify")
                           ? prompts.get("verify")
                           : std::string("Does this proof support {{answer}}? yes/no\n{{proof}}");
    llm::ChatRequest req(
        "", text::render(tmpl, {{"answer", std::string(1, answer)}, {"proof", serialize(proof)}}),
        "verify");
    auto resp = provider->complete(req);
    for (const auto& tok : text::tokenize(resp.text)) {
      if (tok == "yes") {
        r.verifier = true;
        break;
      }
      if (tok == "no") {
        r.verifier = false;
        break;
      }
    }
    if (r.verifier) {
      r.consistent = r.deterministic_ok && *r.verifier;
    } else {
      r.verifier_unparsed = true;
    }
  }
  return r;
}

char reselect(const std::string& proof_text, const std::string& stem, const Options& options,
              llm::ChatProvider& provider, const cogpred::PromptRegistry& prompts) {
  std::string tmpl = prompts.contains("reselect")
                         ? prompts.get("reselect")
                         : std::string("{{stem}}\n{{options}}\n{{proof}}\nOne letter only.");
  llm::ChatRequest req(
      "",
      text::render(tmpl, {{"stem", stem}, {"options", render_options(options)}, {"proof", proof_text}}),
      "reselect", 16);
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (auto l = extract_letter(provider.complete(req).text)) return *l;
  }
  throw Error(Errc::kReselect, "no option letter in re-selection reply");
}

Outcome classify_outcome(const Attempt& attempt) {
  Outcome o;
  if (attempt.solved) o.proof = attempt.solved->proof;
  auto answered = [&](char l, bool reselected) {
    o.status = Status::kAnswered;
    o.letter = l;
    o.reselected = reselected;
    return o;
  };
  if (attempt.solved) {
    bool consistent = attempt.consistent.value_or(true);
    if (!consistent && attempt.reselected_letter) return answered(*attempt.reselected_letter, true);
    return answered(attempt.solved->answer, false);
  }
  if (attempt.reselected_letter) return answered(*attempt.reselected_letter, true);
  if (attempt.direct_letter) return answered(*attempt.direct_letter, false);
  return o;
}

}  // namespace cograg::reason
