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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "cograg/cogpred.hpp"
#include "cograg/error.hpp"
#include "cograg/judge.hpp"
#include "cograg/reason.hpp"
#include "cograg/report.hpp"
#include "cograg/retrieval.hpp"
#include "fixture_run.hpp"
#include "oracles.hpp"
#include "proof_fuzz.hpp"
#include "report_records.hpp"

using namespace cograg;
using namespace cograg::testing_support;

namespace {

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) detail = what;
      ok = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

Check trigger_grid() {
  Check c;
  auto t0 = Clock::now();
  int cases = 0, mismatches = 0;
  for (int rel = 0; rel <= 100; rel += 10) {
    for (int margin = 0; margin <= 100; margin += 5) {
      for (int alpha = 0; alpha <= 100; alpha += 25) {
        for (int beta = 0; beta <= 100; beta += 25) {
          judge::JudgeVerdict v;
          v.rel = rel;
          v.support = {margin, 0, 0, 0};
          bool indicator = rel < alpha || margin < beta;
          auto d = judge::should_trigger(v, alpha, beta);
          if (d.triggered != indicator || d.top_two.margin != margin) ++mismatches;
          ++cases;
        }
      }
    }
  }
  double s = seconds_since(t0);
  c.require(cases == 5775, "case count " + std::to_string(cases));
  c.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  c.require(s < 1.0, "runtime " + std::to_string(s) + " s");
  if (c.ok) c.detail = std::to_string(cases) + " cases, 0 mismatches, " + std::to_string(s) + " s";
  return c;
}

// ---------------------------------------------------------------- 2

Check retrieval_oracles() {
  Check c;
  auto t0 = Clock::now();
  Gen g(2);
  llm::HashEmbedder emb(64);
  int comparisons = 0;
  for (int kbi = 0; kbi < 50 && c.ok; ++kbi) {
    auto kb = random_kb(g, static_cast<std::size_t>(g.uniform(1, 500)), emb);
    retrieval::Bm25Index bm25(kb);
    for (int q = 0; q < 4; ++q) {
      auto query = g.sentence(1, 5);
      auto k = static_cast<std::size_t>(g.uniform(1, 40));
      auto qv = emb.embed_one(query);
      auto tags = kb::TagSet::from_bits(static_cast<std::uint8_t>(g.uniform(0, 63)));

      c.require(same_ranking(retrieval::tag_constrained_search(kb, emb, query, tags, k),
                             dense_oracle(kb, qv, &tags, k)),
                "tag_constrained_search differs on kb " + std::to_string(kbi));
      c.require(same_ranking(retrieval::dense_search(kb, qv, std::nullopt, k), dense_oracle(kb, qv, nullptr, k)),
                "dense_search differs on kb " + std::to_string(kbi));
      c.require(same_ranking(bm25.search(query, k), bm25_oracle(kb, query, k)),
                "bm25 differs on kb " + std::to_string(kbi));

      std::vector<retrieval::RankedList> lists = {bm25.search(query, 50),
                                                  retrieval::dense_search(kb, qv, std::nullopt, 50)};
      std::vector<std::vector<kb::EntryId>> raw = {lists[0].ids(), lists[1].ids()};
      c.require(same_ranking(retrieval::rrf_fuse(lists, 60, k), rrf_oracle(raw, 60, k)),
                "rrf_fuse differs on kb " + std::to_string(kbi));
      comparisons += 4;
    }
  }
  double s = seconds_since(t0);
  c.require(s < 30.0, "runtime " + std::to_string(s) + " s");
  if (c.ok) c.detail = "50 KBs, " + std::to_string(comparisons) + " oracle comparisons, " + std::to_string(s) + " s";
  return c;
}

// ---------------------------------------------------------------- 3

Check consolidation_and_routing() {
  using cogpred::CognitiveLevel;
  using cogpred::RoutingCategory;
  Check c;
  const std::array<RoutingCategory, 5> want = {RoutingCategory::kLow, RoutingCategory::kLow, RoutingCategory::kHigh,
                                               RoutingCategory::kHigh, RoutingCategory::kHigh};
  for (std::size_t i = 0; i < 5; ++i) {
    c.require(cogpred::consolidate(cogpred::kAllLevels[i]) == want[i],
              "consolidate(" + std::string(cogpred::level_code(cogpred::kAllLevels[i])) + ")");
  }
  auto rep = eval::compute_report(routing_ten());
  c.require(rep.routing_evaluated == 10, "routing_evaluated");
  c.require(rep.routing_hit_overall && *rep.routing_hit_overall == 70.0, "overall hit rate != 7/10");
  c.require(rep.routing_hit_low && *rep.routing_hit_low == 75.0, "LOW hit rate != 3/4");
  c.require(rep.routing_hit_high && *rep.routing_hit_high == 400.0 / 6, "HIGH hit rate != 4/6");
  if (c.ok) c.detail = "5/5 mappings; hit rates 70.0 / 75.0 / 66.7 equal hand count";
  return c;
}

// ---------------------------------------------------------------- 4

Check metric_reproduction() {
  Check c;
  auto rep = eval::compute_report(records_with_accuracy({727, 735, 653, 770, 718}, {1000, 1000, 1000, 1000, 1000}));
  std::string macro = eval::format_one_decimal(rep.macro);
  auto trig = eval::compute_report(records_with_triggers(127, 811));
  std::string rate = eval::format_one_decimal(trig.trigger_rate);
  c.require(macro == "72.0", "macro of [72.7, 73.5, 65.3, 77.0, 71.8] = " + std::to_string(rep.macro) +
                                 " emitted as " + macro + " under half-up rounding (expected 72.0); trigger rate " +
                                 rate);
  c.require(rate == "15.7", "trigger rate 127/811 emitted as " + rate);
  if (c.ok) c.detail = "macro " + macro + ", trigger rate " + rate;
  return c;
}

// ---------------------------------------------------------------- 5

Check schema_enforcement() {
  Check c;
  Gen g(55);
  int accepted = 0, rejected = 0;
  for (int i = 0; i < 200; ++i) {
    bool high = g.coin();
    auto cat = high ? cogpred::RoutingCategory::kHigh : cogpred::RoutingCategory::kLow;
    auto reply = malformed_proof_reply(g, high);
    try {
      auto p = reason::parse_proof(reply, cat);
      c.require(proof_invariants_hold(p), "invalid proof escaped: " + reply);
      ++accepted;
    } catch (const Error& e) {
      c.require(e.code() == Errc::kSchema, "unexpected error kind for: " + reply);
      ++rejected;
    }
  }
  int bound_rejections = 0;
  for (int rules : {1, 6}) {
    for (char a : {'A', 'B', 'C', 'D'}) {
      try {
        reason::parse_proof(valid_high_json(a, rules).dump(), cogpred::RoutingCategory::kHigh);
        c.require(false, "HIGH proof with " + std::to_string(rules) + " rules accepted");
      } catch (const Error&) {
        ++bound_rejections;
      }
    }
  }
  if (c.ok) {
    c.detail = "200 fuzzed replies: " + std::to_string(accepted) + " valid, " + std::to_string(rejected) +
               " rejected; " + std::to_string(bound_rejections) + "/8 out-of-bound rule counts rejected";
  }
  return c;
}

// ---------------------------------------------------------------- 6, 7

FixtureWorld& world() {
  static FixtureWorld w;
  return w;
}

Check end_to_end_determinism() {
  Check c;
  auto t0 = Clock::now();
  auto cfg = eval::RunConfig::for_method(eval::Method::kCogragPlus);
  std::set<std::string> reports;
  std::vector<eval::ItemRecord> records;
  for (int i = 0; i < 3; ++i) {
    records = world().run("gold_script.jsonl", cfg);
    reports.insert(eval::emit_report(eval::compute_report(records), eval::ReportFormat::kMachine));
  }
  c.require(reports.size() == 1, std::to_string(reports.size()) + " distinct machine reports");
  std::ifstream in(fixture("gold_expected.json"));
  auto expected = nlohmann::json::parse(in);
  int matched = 0;
  for (const auto& r : records) {
    const auto& e = expected["items"][r.id];
    bool same = r.outcome.letter && std::string(1, *r.outcome.letter) == e["answer"].get<std::string>() &&
                r.correct == e["correct"].get<bool>();
    c.require(same, "item " + r.id + " differs from hand-scored answer");
    matched += same;
  }
  double s = seconds_since(t0);
  c.require(s < 60.0, "runtime " + std::to_string(s) + " s");
  if (c.ok) {
    c.detail = "3 identical machine reports; " + std::to_string(matched) + "/20 answers match hand scoring; " +
               std::to_string(s) + " s";
  }
  return c;
}

Check unanswered_accounting() {
  Check c;
  auto records = world().run("unanswered_script.jsonl", eval::RunConfig::for_method(eval::Method::kCogragPlus));
  auto rep = eval::compute_report(records);
  std::string rate = eval::format_one_decimal(rep.unanswered_rate);
  c.require(rate == "15.0", "unanswered rate " + rate);
  c.require(rep.unanswered_count == 3, "unanswered count " + std::to_string(rep.unanswered_count));
  for (const auto& it : rep.items) {
    if (!it.answered) c.require(!it.correct, it.id + " unanswered but counted correct");
  }
  if (c.ok) c.detail = "unanswered " + rate + "% (3/20), all counted incorrect";
  return c;
}

// ---------------------------------------------------------------- 8

Check budget_safety() {
  Check c;
  Gen g(88);
  for (int t = 0; t < 1000; ++t) {
    std::vector<retrieval::Snippet> s;
    int n = g.uniform(0, 10);
    for (int i = 0; i < n; ++i) {
      std::string text;
      int sents = g.uniform(1, 6);
      for (int j = 0; j < sents; ++j) text += (j ? " " : "") + g.sentence(1, 20);
      s.push_back({static_cast<kb::EntryId>(i), text});
    }
    auto budget = static_cast<std::size_t>(g.uniform(1, 300));
    auto block = retrieval::pack_snippets(s, budget);
    c.require(block.token_count <= budget, "format_evidence exceeded budget on trial " + std::to_string(t));
  }
  llm::HashEmbedder emb(32);
  const Options opts{"vitamin c", "calcium", "tea", "zinc"};
  int remediations = 0;
  for (int t = 0; t < 200; ++t) {
    auto kb = random_kb(g, static_cast<std::size_t>(g.uniform(3, 60)), emb);
    auto budget = static_cast<std::size_t>(g.uniform(1, 150));
    auto tags = g.tags();
    auto e1 = retrieval::format_evidence(retrieval::tag_constrained_search(kb, emb, g.sentence(2, 4), tags, 5), kb,
                                         budget);
    judge::RemediationContext ctx{kb, emb, tags, budget};
    llm::MockProvider m({{"rr_low", std::nullopt, "1. " + g.sentence(1, 3) + "\n2. " + g.sentence(1, 3), false},
                         {"rr_high", std::nullopt, "1. vitamin c and zinc\n2. calcium or zinc", false}});
    judge::JudgeVerdict v;
    v.support = {60, 50, 40, 30};
    auto cat = g.coin() ? cogpred::RoutingCategory::kLow : cogpred::RoutingCategory::kHigh;
    auto r = judge::reinforce("s", opts, v, cat, e1, ctx, m);
    c.require(!r.failed, "remediation failed unexpectedly");
    c.require(r.evidence.token_count <= budget, "E2 exceeded budget on trial " + std::to_string(t));
    ++remediations;
  }
  if (c.ok) c.detail = "1000 format_evidence trials and " + std::to_string(remediations) + " remediations within B";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"1 trigger-logic equivalence", trigger_grid},
      {"2 retrieval oracle equivalence", retrieval_oracles},
      {"3 consolidation and routing", consolidation_and_routing},
      {"4 metric reproduction", metric_reproduction},
      {"5 schema enforcement", schema_enforcement},
      {"6 end-to-end determinism", end_to_end_determinism},
      {"7 unanswered accounting", unanswered_accounting},
      {"8 budget safety", budget_safety},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %s: %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), c.detail.c_str());
    failed += c.ok ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
