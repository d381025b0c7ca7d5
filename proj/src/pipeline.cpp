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

#include "cograg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "cograg/error.hpp"
#include "cograg/text.hpp"

namespace cograg::eval {

using cogpred::RoutingCategory;

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kBaseline: return "baseline";
    case Method::kBm25: return "bm25";
    case Method::kDense: return "dense";
    case Method::kHybrid: return "hybrid";
    case Method::kCograg: return "cograg";
    case Method::kCogragPlus: return "cograg_plus";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view s) {
  std::string lower = text::to_lower(text::trim(s));
  if (lower == "cograg+" || lower == "cograg-plus") return Method::kCogragPlus;
  for (Method m : {Method::kBaseline, Method::kBm25, Method::kDense, Method::kHybrid,
                   Method::kCograg, Method::kCogragPlus}) {
    if (lower == method_name(m)) return m;
  }
  return std::nullopt;
}

RunConfig RunConfig::for_method(Method m) {
  RunConfig c;
  c.method = m;
  bool plus = m == Method::kCogragPlus;
  bool cog = plus || m == Method::kCograg;
  c.rr_enabled = plus;
  c.cr_enabled = plus;
  c.verifier = plus;
  c.cog_injection = cog;
  c.few_shot_level = true;
  return c;
}

std::size_t ItemRecord::stage_calls(std::string_view stage) const {
  std::size_t n = 0;
  for (const auto& c : calls) n += c.stage == stage ? 1 : 0;
  return n;
}

namespace {

std::string retrieval_query(const ExamItem& item) {
  std::string q = item.stem;
  for (const auto& o : item.options) q += " " + o;
  return q;
}

bool is_cograg(Method m) { return m == Method::kCograg || m == Method::kCogragPlus; }

// Direct answering: one letter from a composed prompt, one retry.
std::optional<char> direct_answer(const cogpred::PromptPair& prompts, int max_tokens,
                                  llm::ChatProvider& provider) {
  llm::ChatRequest req(prompts.system, prompts.user, "answer", max_tokens);
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (auto l = extract_letter(provider.complete(req).text)) return l;
  }
  return std::nullopt;
}

}  // namespace

ItemRecord run_item(const ExamItem& item, const RunConfig& config, const Resources& res,
                    llm::ChatProvider& provider) {
  llm::SessionProvider session(provider, item.id);
  const auto& prompts = *res.prompts;
  ItemRecord rec;
  rec.id = item.id;
  rec.mode = item.mode;
  rec.gold = item.gold;
  rec.gold_level = item.level;

  reason::Attempt attempt;
  try {
    const bool cog = is_cograg(config.method);

    // (A) cognitive prediction
    std::optional<cogpred::LevelPrediction> pred;
    if (cog || config.cog_injection) {
      pred = config.direct_binary
                 ? cogpred::predict_binary(item.stem, item.options, session, config.few_shot_level,
                                           prompts)
                 : cogpred::predict_level(item.stem, item.options, session, config.few_shot_level,
                                          prompts);
      rec.predicted_level = pred->level;
      rec.predicted_category = pred->category;
      rec.level_defaulted = pred->defaulted;
    }
    RoutingCategory category = pred ? pred->category : RoutingCategory::kLow;

    // (B) retrieval
    retrieval::EvidenceBlock evidence;
    evidence.budget = config.budget;
    std::string query = retrieval_query(item);
    std::optional<retrieval::RankedList> ranked;
    switch (config.method) {
      case Method::kBaseline:
        break;
      case Method::kBm25:
        ranked = res.bm25->search(query, config.top_k);
        break;
      case Method::kDense:
        ranked = retrieval::dense_search(*res.kb, res.embedder->embed_one(query), std::nullopt,
                                         config.top_k);
        break;
      case Method::kHybrid:
        ranked = retrieval::hybrid_search(*res.kb, *res.bm25, *res.embedder, query, config.top_k);
        break;
      case Method::kCograg:
      case Method::kCogragPlus: {
        auto tags = cogpred::predict_tags(item.stem, item.options, session, prompts);
        rec.tags = tags.tags;
        rec.tags_defaulted = tags.defaulted;
        ranked = retrieval::tag_constrained_search(*res.kb, *res.embedder, query, tags.tags,
                                                   config.top_k);
        break;
      }
    }
    if (ranked) {
      ++rec.retrieval_calls;
      rec.retrieval_queries.push_back(query);
      evidence = retrieval::format_evidence(*ranked, *res.kb, config.budget, res.counter);
    }
    rec.evidence_ids = evidence.ids();
    rec.evidence_tokens = evidence.token_count;

    // (B') judge and reinforced retrieval
    if (config.method == Method::kCogragPlus && config.rr_enabled) {
      judge::JudgeVerdict verdict;
      try {
        verdict = judge::judge(item.stem, item.options, evidence, session, prompts);
        rec.verdict = verdict;
      } catch (const Error& e) {
        if (e.code() != Errc::kJudge) throw;
        rec.judge_failed = true;
        rec.errors.push_back(e.what());
        verdict = judge::JudgeVerdict{};  // rel 0 forces remediation
      }
      auto decision = judge::should_trigger(verdict, config.alpha, config.beta);
      rec.trigger = decision;
      if (rec.verdict) rec.judge_top1 = decision.top_two.letters.first;
      if (decision.triggered) {
        judge::RemediationContext ctx{*res.kb, *res.embedder,
                                      rec.tags.value_or(kb::TagSet::all()), config.budget,
                                      res.counter};
        auto rr = judge::reinforce(item.stem, item.options, verdict, category, evidence, ctx,
                                   session, prompts);
        rec.remediated = !rr.failed;
        rec.remediation_failed = rr.failed;
        if (rr.failed) rec.errors.push_back(rr.error);
        rec.retrieval_calls += rr.queries.size();
        for (auto& q : rr.queries) rec.retrieval_queries.push_back(std::move(q));
        evidence = std::move(rr.evidence);
      }
    }
    rec.final_evidence_ids = evidence.ids();
    rec.final_evidence_tokens = evidence.token_count;

    // (C) answering
    std::optional<std::string> level_line;
    if (pred && config.cog_injection) level_line = cogpred::level_tag_line(pred->level, category);

    if (config.standard_cot) {
      auto vars = cogpred::question_vars(level_line, item.stem, item.options, evidence);
      std::string system = pred && config.cog_injection
                               ? cogpred::select_system_prompt(category, prompts)
                               : prompts.get("sys_base");
      llm::ChatRequest req(system, text::render(prompts.get("cot"), vars), "cot",
                           config.answer_max_tokens);
      auto resp = session.complete(req);
      attempt.direct_letter = extract_letter(resp.text);
      if (!attempt.direct_letter && resp.truncated) {
        rec.errors.push_back("chain of thought hit the output budget");
      }
    } else if (config.method == Method::kCogragPlus && config.cr_enabled) {
      reason::SolveContext sctx{pred ? pred->level : std::nullopt, config.proof_max_tokens};
      std::string raw;
      try {
        attempt.solved = reason::solve(item.stem, item.options, evidence, category, session, sctx,
                                       &raw, prompts);
      } catch (const Error& e) {
        if (e.code() != Errc::kSchema) throw;
        rec.errors.push_back(e.what());
      }
      std::optional<std::string> reselect_input;
      if (attempt.solved) {
        auto cons = reason::check_consistency(attempt.solved->proof, attempt.solved->answer,
                                              config.verifier ? &session : nullptr, prompts);
        attempt.consistent = cons.consistent;
        rec.consistent = cons.consistent;
        rec.verifier_unparsed = cons.verifier_unparsed;
        if (!cons.consistent) reselect_input = reason::serialize(attempt.solved->proof);
      } else {
        reselect_input = raw;
      }
      if (reselect_input) {
        try {
          attempt.reselected_letter =
              reason::reselect(*reselect_input, item.stem, item.options, session, prompts);
        } catch (const Error& e) {
          if (e.code() != Errc::kReselect) throw;
          rec.errors.push_back(e.what());
        }
      }
    } else {
      auto pair = pred && config.cog_injection
                      ? cogpred::compose_prompts(category, pred->level, item.stem, item.options,
                                                 evidence, prompts)
                      : cogpred::compose_plain_prompts(item.stem, item.options, evidence, prompts);
      attempt.direct_letter = direct_answer(pair, config.answer_max_tokens, session);
      if (!attempt.direct_letter) rec.errors.push_back("no option letter in answer");
    }
  } catch (const std::exception& e) {
    rec.errors.push_back(e.what());
  }

  rec.outcome = reason::classify_outcome(attempt);
  rec.correct = rec.outcome.status == reason::Status::kAnswered && rec.outcome.letter == item.gold;
  rec.calls = session.calls();
  return rec;
}

std::vector<ItemRecord> run_all(const std::vector<ExamItem>& items, const RunConfig& config,
                                const Resources& res, llm::ChatProvider& provider,
                                llm::RunLog* log) {
  std::vector<ItemRecord> records(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      records[i] = run_item(items[i], config, res, provider);
    }
  };
  std::size_t n = std::max<std::size_t>(1, std::min(config.workers, items.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  if (log != nullptr) {
    for (const auto& r : records) {
      auto j = to_json(r, true);
      nlohmann::json rec = nlohmann::json::parse(j.dump());
      rec["kind"] = "item";
      log->append(rec);
    }
  }
  return records;
}

nlohmann::ordered_json to_json(const ItemRecord& r, bool with_calls) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["mode"] = mode_name(r.mode);
  j["gold"] = std::string(1, r.gold);
  j["gold_level"] = cogpred::level_code(r.gold_level);
  j["predicted_level"] =
      r.predicted_level ? nlohmann::ordered_json(cogpred::level_code(*r.predicted_level)) : nullptr;
  j["predicted_category"] = r.predicted_category
                                ? nlohmann::ordered_json(cogpred::category_name(*r.predicted_category))
                                : nullptr;
  j["level_defaulted"] = r.level_defaulted;
  j["tags"] = r.tags ? nlohmann::ordered_json(r.tags->to_string()) : nullptr;
  j["tags_defaulted"] = r.tags_defaulted;
  j["retrieval_calls"] = r.retrieval_calls;
  j["retrieval_queries"] = r.retrieval_queries;
  j["evidence_ids"] = r.evidence_ids;
  j["evidence_tokens"] = r.evidence_tokens;
  if (r.verdict) {
    j["verdict"] = {{"rel", r.verdict->rel},
                    {"support", r.verdict->support},
                    {"target", r.verdict->target == judge::Target::kCorrect ? "CORRECT" : "INCORRECT"},
                    {"target_defaulted", r.verdict->target_defaulted}};
  } else {
    j["verdict"] = nullptr;
  }
  j["judge_failed"] = r.judge_failed;
  if (r.trigger) {
    const auto& t = r.trigger->top_two;
    j["trigger"] = {{"triggered", r.trigger->triggered},
                    {"reason", judge::reason_name(r.trigger->reason)},
                    {"top_two", {std::string(1, t.letters.first), std::string(1, t.letters.second)}},
                    {"s1", t.s1},
                    {"s2", t.s2},
                    {"margin", t.margin}};
  } else {
    j["trigger"] = nullptr;
  }
  j["remediated"] = r.remediated;
  j["remediation_failed"] = r.remediation_failed;
  j["final_evidence_ids"] = r.final_evidence_ids;
  j["final_evidence_tokens"] = r.final_evidence_tokens;
  j["consistent"] = r.consistent ? nlohmann::ordered_json(*r.consistent) : nullptr;
  j["verifier_unparsed"] = r.verifier_unparsed;
  j["status"] = r.outcome.status == reason::Status::kAnswered ? "ANSWERED" : "UNANSWERED";
  j["answer"] = r.outcome.letter ? nlohmann::ordered_json(std::string(1, *r.outcome.letter)) : nullptr;
  j["reselected"] = r.outcome.reselected;
  j["proof"] = r.outcome.proof ? reason::to_json(*r.outcome.proof) : nullptr;
  j["correct"] = r.correct;
  j["errors"] = r.errors;
  if (with_calls) {
    auto calls = nlohmann::ordered_json::array();
    for (const auto& c : r.calls) {
      calls.push_back({{"stage", c.stage},
                       {"system", c.system},
                       {"user", c.user},
                       {"reply", c.reply},
                       {"truncated", c.truncated},
                       {"failed", c.failed}});
    }
    j["calls"] = calls;
  }
  return j;
}

}  // namespace cograg::eval
