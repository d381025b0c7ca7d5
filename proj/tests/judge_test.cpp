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

#include <gtest/gtest.h>

#include <cmath>

#include "cograg/error.hpp"
#include "cograg/judge.hpp"
#include "test_support.hpp"

using namespace cograg;
using namespace cograg::judge;
using cograg::cogpred::RoutingCategory;
using cograg::testing_support::Gen;

namespace {

const Options kOpts{"Vitamin C intake", "Calcium with meals", "Tea after meals", "Zinc supplements"};

JudgeVerdict verdict(int rel, std::array<int, 4> support, Target t = Target::kCorrect) {
  JudgeVerdict v;
  v.rel = rel;
  v.support = support;
  v.target = t;
  return v;
}

kb::QAEntry entry(std::string q, std::string a) {
  kb::QAEntry e;
  e.question = std::move(q);
  e.answer = std::move(a);
  e.source = "toy";
  e.tags = kb::TagSet{kb::Tag::T3};
  return e;
}

/// Entry 1 is a near-duplicate of entry 0 (cosine 0.95); entry 2 is orthogonal.
kb::KnowledgeBase near_dup_kb() {
  kb::KnowledgeBase kb({entry("Iron and vitamin C?", "It helps."), entry("Vitamin C and iron?", "Helps."),
                        entry("Tea and iron?", "Tannins inhibit absorption.")});
  kb::EmbeddingMatrix m(3, 3);
  m.row(0)[0] = 1.0f;
  m.row(1)[0] = 0.95f;
  m.row(1)[1] = static_cast<float>(std::sqrt(1.0 - 0.95 * 0.95));
  m.row(2)[2] = 1.0f;
  kb.set_embeddings(std::move(m));
  return kb;
}

retrieval::EvidenceBlock e1_of(const kb::KnowledgeBase& kb, kb::EntryId id, std::size_t budget) {
  return retrieval::pack_snippets({{id, retrieval::render_entry(kb.entry(id))}}, budget);
}

}  // namespace

// ---------------------------------------------------------------- verdicts

TEST(ParseVerdict, ReadsAllFields) {
  auto v = parse_verdict(R"({"rel":85,"support":[90,40,20,10],"target":"CORRECT"})");
  EXPECT_EQ(v, verdict(85, {90, 40, 20, 10}));
  EXPECT_FALSE(v.target_defaulted);
}

TEST(ParseVerdict, ClampsAndDefaultsTarget) {
  auto v = parse_verdict(R"(Scores: {"rel":150,"support":[-5,"40",100.4,7]})");
  EXPECT_EQ(v.rel, 100);
  EXPECT_EQ(v.support, (std::array<int, 4>{0, 40, 100, 7}));
  EXPECT_EQ(v.target, Target::kCorrect);
  EXPECT_TRUE(v.target_defaulted);
  EXPECT_EQ(parse_verdict(R"({"rel":1,"support":{"A":1,"B":2,"C":3,"D":4},"target":"INCORRECT"})").target,
            Target::kIncorrect);
}

TEST(ParseVerdict, MissingOrMalformedSupportIsJudgeError) {
  for (const char* bad : {R"({"rel":85})", R"({"support":[1,2,3,4]})", R"({"rel":5,"support":[1,2,3]})",
                          R"({"rel":"x","support":[1,2,3,4]})", "no json"}) {
    try {
      parse_verdict(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kJudge) << bad;
    }
  }
}

TEST(Judge, RetriesOnceThenFails) {
  llm::MockProvider ok({{"judge", 0, "garbage", false},
                        {"judge", 1, R"({"rel":70,"support":[1,2,3,4]})", false}});
  EXPECT_EQ(judge::judge("s", kOpts, {}, ok).rel, 70);
  llm::MockProvider bad({{"judge", std::nullopt, "{\"rel\": 3}", false}});
  EXPECT_THROW(judge::judge("s", kOpts, {}, bad), Error);
  EXPECT_EQ(bad.calls("judge"), 2u);
}

// ---------------------------------------------------------------- top two

TEST(TopTwo, Examples) {
  EXPECT_EQ(top_two_margin(verdict(0, {90, 55, 20, 10})), (TopTwo{90, 55, 35, {'A', 'B'}}));
  EXPECT_EQ(top_two_margin(verdict(0, {90, 10, 80, 70}, Target::kIncorrect)), (TopTwo{90, 30, 60, {'B', 'D'}}));
  EXPECT_EQ(top_two_margin(verdict(0, {50, 50, 50, 50})), (TopTwo{50, 50, 0, {'A', 'B'}}));
  EXPECT_EQ(top_two_margin(verdict(0, {10, 60, 20, 60})).letters, (std::pair<char, char>{'B', 'D'}));
}

TEST(TopTwo, LettersInvariantUnderShift) {
  Gen g(8);
  for (int t = 0; t < 2000; ++t) {
    std::array<int, 4> s{};
    for (auto& x : s) x = g.uniform(0, 60);
    int c = g.uniform(0, 40);
    auto shifted = s;
    for (auto& x : shifted) x += c;
    auto target = g.coin() ? Target::kCorrect : Target::kIncorrect;
    auto a = top_two_margin(verdict(0, s, target));
    auto b = top_two_margin(verdict(0, shifted, target));
    ASSERT_EQ(a.letters, b.letters);
    ASSERT_EQ(a.margin, b.margin);
  }
}

// ---------------------------------------------------------------- trigger

TEST(ShouldTrigger, Examples) {
  auto a = should_trigger(verdict(40, {80, 70, 10, 5}), 50, 35);
  EXPECT_TRUE(a.triggered);
  EXPECT_EQ(a.reason, TriggerReason::kRelevance);
  auto b = should_trigger(verdict(90, {90, 50, 10, 5}), 50, 35);
  EXPECT_FALSE(b.triggered);
  EXPECT_EQ(b.reason, TriggerReason::kNone);
  auto c = should_trigger(verdict(60, {70, 50, 10, 5}), 50, 35);
  EXPECT_TRUE(c.triggered);
  EXPECT_EQ(c.reason, TriggerReason::kMargin);
  EXPECT_EQ(c.top_two.margin, 20);
  EXPECT_EQ(reason_name(c.reason), "MARGIN");
}

TEST(ShouldTrigger, ExhaustiveGridMatchesIndicator) {
  int cases = 0;
  for (int rel = 0; rel <= 100; rel += 5) {
    for (int margin = 0; margin <= 100; margin += 5) {
      for (int alpha = 0; alpha <= 100; alpha += 25) {
        for (int beta = 0; beta <= 100; beta += 25) {
          auto d = should_trigger(verdict(rel, {margin, 0, 0, 0}), alpha, beta);
          bool want = rel < alpha || margin < beta;
          ASSERT_EQ(d.triggered, want);
          ASSERT_EQ(d.triggered, d.reason != TriggerReason::kNone);
          if (rel < alpha) ASSERT_EQ(d.reason, TriggerReason::kRelevance);
          ++cases;
        }
      }
    }
  }
  EXPECT_EQ(cases, 21 * 21 * 25);
}

TEST(ShouldTrigger, Monotone) {
  Gen g(13);
  for (int t = 0; t < 5000; ++t) {
    std::array<int, 4> s{};
    for (auto& x : s) x = g.uniform(0, 100);
    auto v = verdict(g.uniform(0, 100), s, g.coin() ? Target::kCorrect : Target::kIncorrect);
    int alpha = g.uniform(0, 100), beta = g.uniform(0, 100);
    auto base = should_trigger(v, alpha, beta);
    if (base.triggered) {
      ASSERT_TRUE(should_trigger(v, g.uniform(alpha, 100), beta).triggered);
    }
    if (base.reason == TriggerReason::kMargin) {
      ASSERT_TRUE(should_trigger(v, alpha, g.uniform(beta, 100)).triggered);
    }
  }
}

// ---------------------------------------------------------------- queries

TEST(QueryList, ParsesAndDeduplicates) {
  EXPECT_EQ(parse_query_list("1. vitamin D sources\n2. vitamin D RDA\n3. vitamin D deficiency"),
            (std::vector<std::string>{"vitamin D sources", "vitamin D RDA", "vitamin D deficiency"}));
  EXPECT_EQ(parse_query_list("Here:\n1) A\n2) a\n- \"B\"\n* C\nnot a query"),
            (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_TRUE(parse_query_list("").empty());
}

TEST(FactQueries, CapAtThreeAndErrorOnEmpty) {
  llm::MockProvider m({{"rr_low", 0, "1. a\n2. b\n3. c\n4. d", false}});
  EXPECT_EQ(fact_centric_queries("s", kOpts, m).size(), 3u);
  llm::MockProvider empty({{"rr_low", std::nullopt, "", false}});
  try {
    fact_centric_queries("s", kOpts, empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kRemediation);
  }
  EXPECT_EQ(empty.calls("rr_low"), 2u);
}

namespace {

class Recorder : public llm::ChatProvider {
 public:
  explicit Recorder(std::string reply) : reply_(std::move(reply)) {}
  llm::ChatResponse complete(const llm::ChatRequest& r) override {
    seen.push_back(r);
    return {reply_, false, {}};
  }
  std::vector<llm::ChatRequest> seen;

 private:
  std::string reply_;
};

}  // namespace

TEST(OptionQueries, PromptCarriesBothCandidatesAndFiltersByKeyTerms) {
  Recorder r("1. calcium with meals versus zinc\n2. zinc supplements and iron\n3. weather today");
  auto q = option_centric_queries("Which reduces iron absorption?", {'B', 'D'}, kOpts, r);
  ASSERT_EQ(r.seen.size(), 1u);
  EXPECT_EQ(r.seen[0].tag, "rr_high");
  EXPECT_NE(r.seen[0].user.find("B. Calcium with meals"), std::string::npos);
  EXPECT_NE(r.seen[0].user.find("D. Zinc supplements"), std::string::npos);
  EXPECT_EQ(q, (std::vector<std::string>{"calcium with meals versus zinc", "zinc supplements and iron"}));
}

TEST(OptionQueries, UnparseableTwiceIsError) {
  llm::MockProvider m({{"rr_high", std::nullopt, "nothing useful", false}});
  EXPECT_THROW(option_centric_queries("s", {'A', 'B'}, kOpts, m), Error);
  EXPECT_EQ(key_terms("The Vitamin C intake"), (std::vector<std::string>{"vitamin", "intake"}));
}

// ---------------------------------------------------------------- reinforce

TEST(Reinforce, LowUsesFactPath) {
  auto kb = near_dup_kb();
  testing_support::TableEmbedder emb(3);
  RemediationContext ctx{kb, emb, kb::TagSet::all(), 200};
  llm::MockProvider m({{"rr_low", std::nullopt, "1. iron\n2. tea", false}});
  auto r = reinforce("s", kOpts, verdict(10, {1, 2, 3, 4}), RoutingCategory::kLow, e1_of(kb, 2, 200), ctx, m);
  EXPECT_FALSE(r.failed);
  EXPECT_EQ(m.calls("rr_low"), 1u);
  EXPECT_EQ(m.calls("rr_high"), 0u);
  EXPECT_EQ(r.queries.size(), 2u);
}

TEST(Reinforce, RedundantSnippetsRemoved) {
  auto kb = near_dup_kb();
  testing_support::TableEmbedder emb(3);
  RemediationContext ctx{kb, emb, kb::TagSet::all(), 500};
  llm::MockProvider m({{"rr_high", std::nullopt, "1. vitamin C intake facts", false}});
  auto e1 = e1_of(kb, 0, 500);
  auto r = reinforce("s", kOpts, verdict(90, {60, 50, 0, 0}), RoutingCategory::kHigh, e1, ctx, m);
  ASSERT_FALSE(r.failed);
  EXPECT_EQ(r.evidence.ids(), (std::vector<kb::EntryId>{0, 2}));
  EXPECT_EQ(r.evidence.snippets.front(), e1.snippets.front());
}

TEST(Reinforce, FailureKeepsE1Flagged) {
  auto kb = near_dup_kb();
  testing_support::TableEmbedder emb(3);
  RemediationContext ctx{kb, emb, kb::TagSet::all(), 100};
  llm::MockProvider m({{"rr_low", std::nullopt, "", false}});
  auto e1 = e1_of(kb, 1, 100);
  auto r = reinforce("s", kOpts, verdict(0, {1, 2, 3, 4}), RoutingCategory::kLow, e1, ctx, m);
  EXPECT_TRUE(r.failed);
  EXPECT_EQ(r.evidence, e1);
  EXPECT_FALSE(r.error.empty());
}

TEST(Reinforce, E2NeverExceedsBudget) {
  Gen g(77);
  llm::HashEmbedder emb(32);
  for (int t = 0; t < 60; ++t) {
    auto kb = testing_support::random_kb(g, static_cast<std::size_t>(g.uniform(5, 80)), emb);
    auto budget = static_cast<std::size_t>(g.uniform(1, 120));
    auto tags = g.tags();
    auto first = retrieval::tag_constrained_search(kb, emb, g.sentence(2, 4), tags, 5);
    auto e1 = retrieval::format_evidence(first, kb, budget);
    RemediationContext ctx{kb, emb, tags, budget};
    llm::MockProvider m({{"rr_low", std::nullopt, "1. " + g.sentence(1, 3) + "\n2. " + g.sentence(1, 3), false},
                         {"rr_high", std::nullopt, "1. " + kOpts[0] + "\n2. " + kOpts[1], false}});
    auto cat = g.coin() ? RoutingCategory::kLow : RoutingCategory::kHigh;
    auto r = reinforce("s", kOpts, verdict(0, {90, 80, 0, 0}), cat, e1, ctx, m);
    ASSERT_FALSE(r.failed);
    ASSERT_LE(r.evidence.token_count, budget);
    auto pool = kb::candidate_pool(kb, tags);
    for (std::size_t i = 0; i < r.evidence.snippets.size(); ++i) {
      auto id = r.evidence.snippets[i].id;
      ASSERT_TRUE(std::binary_search(pool.begin(), pool.end(), id));
      for (std::size_t j = 0; j < i; ++j) ASSERT_NE(r.evidence.snippets[j].id, id);
    }
  }
}
