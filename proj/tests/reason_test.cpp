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

#include "cograg/error.hpp"
#include "cograg/reason.hpp"
#include "proof_fuzz.hpp"

using namespace cograg;
using namespace cograg::reason;
using cograg::cogpred::RoutingCategory;
using namespace cograg::testing_support;

namespace {

const Options kOpts{"Tea", "Milk", "Orange juice", "Coffee"};

std::string schema_error(const std::string& reply, RoutingCategory c) {
  try {
    parse_proof(reply, c);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSchema);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << reply;
  return {};
}

class Recorder : public llm::ChatProvider {
 public:
  explicit Recorder(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  llm::ChatResponse complete(const llm::ChatRequest& r) override {
    seen.push_back(r);
    return {replies_.at(std::min(seen.size() - 1, replies_.size() - 1)), false, {}};
  }
  std::vector<llm::ChatRequest> seen;

 private:
  std::vector<std::string> replies_;
};

}  // namespace

// ---------------------------------------------------------------- schema

TEST(ParseProof, ValidLow) {
  auto p = parse_proof("Proof: " + valid_low_json('B').dump(), RoutingCategory::kLow);
  EXPECT_EQ(proof_answer(p), 'B');
  EXPECT_EQ(proof_schema(p), RoutingCategory::kLow);
  EXPECT_EQ(std::get<LowProof>(p).evidence.size(), 2u);
}

TEST(ParseProof, ValidHighRoundTrips) {
  auto p = parse_proof(valid_high_json('C', 5).dump(), RoutingCategory::kHigh);
  EXPECT_EQ(std::get<HighProof>(p).rules.size(), 5u);
  EXPECT_EQ(parse_proof(serialize(p), RoutingCategory::kHigh), p);
  EXPECT_EQ(serialize(p).rfind("{\"schema\":\"HIGH\",\"assumptions\"", 0), 0u);
}

TEST(ParseProof, RuleCountBounds) {
  EXPECT_EQ(schema_error(valid_high_json('C', 6).dump(), RoutingCategory::kHigh),
            "rules count 6 \xE2\x88\x89 [2,5]");
  EXPECT_EQ(schema_error(valid_high_json('C', 1).dump(), RoutingCategory::kHigh),
            "rules count 1 \xE2\x88\x89 [2,5]");
  EXPECT_NO_THROW(parse_proof(valid_high_json('C', 2).dump(), RoutingCategory::kHigh));
}

TEST(ParseProof, AnswerOutsideDomain) {
  auto j = valid_low_json();
  j["answer"] = "E";
  EXPECT_NE(schema_error(j.dump(), RoutingCategory::kLow).find("'E'"), std::string::npos);
}

TEST(ParseProof, LowFieldConstraints) {
  auto j = valid_low_json();
  j["key_fact"] = "First. Second.";
  EXPECT_EQ(schema_error(j.dump(), RoutingCategory::kLow), "key_fact must be exactly one sentence");
  j = valid_low_json();
  j["elimination"] = "A. B. C. D.";
  EXPECT_NE(schema_error(j.dump(), RoutingCategory::kLow).find("4 sentences"), std::string::npos);
  j = valid_low_json();
  j["evidence"] = nlohmann::ordered_json::array();
  schema_error(j.dump(), RoutingCategory::kLow);
  EXPECT_EQ(schema_error(valid_low_json().dump(), RoutingCategory::kHigh), "schema must be HIGH");
  EXPECT_FALSE(schema_error("no json here", RoutingCategory::kLow).empty());
}

TEST(ParseProof, ComparisonMustCoverFourLetters) {
  auto j = valid_high_json();
  j["comparison"].erase("D");
  schema_error(j.dump(), RoutingCategory::kHigh);
  j = valid_high_json();
  j["comparison"]["E"] = "x";
  schema_error(j.dump(), RoutingCategory::kHigh);
}

TEST(ParseProof, FuzzedRepliesNeverYieldInvalidProofs) {
  Gen g(2024);
  int accepted = 0, rejected = 0;
  for (int t = 0; t < 2000; ++t) {
    bool high = g.coin();
    auto cat = high ? RoutingCategory::kHigh : RoutingCategory::kLow;
    auto reply = malformed_proof_reply(g, high);
    try {
      auto p = parse_proof(reply, cat);
      ASSERT_TRUE(proof_invariants_hold(p)) << reply;
      ASSERT_EQ(proof_schema(p), cat);
      ++accepted;
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), Errc::kSchema) << reply;
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 1000);
  EXPECT_GT(accepted, 0);
}

// ---------------------------------------------------------------- solve

TEST(Solve, LowValid) {
  llm::MockProvider m({{"solve", 0, valid_low_json('B').dump(), false}});
  retrieval::EvidenceBlock ev;
  auto r = solve("Which drink?", kOpts, ev, RoutingCategory::kLow, m);
  EXPECT_EQ(r.answer, 'B');
  EXPECT_TRUE(std::holds_alternative<LowProof>(r.proof));
}

TEST(Solve, RepairPromptQuotesError) {
  Recorder rec({valid_high_json('C', 6).dump(), valid_high_json('C', 4).dump()});
  auto r = solve("s", kOpts, {}, RoutingCategory::kHigh, rec, {cogpred::CognitiveLevel::kApp, 256});
  EXPECT_EQ(r.answer, 'C');
  ASSERT_EQ(rec.seen.size(), 2u);
  EXPECT_EQ(rec.seen[0].system, cogpred::select_system_prompt(RoutingCategory::kHigh));
  EXPECT_NE(rec.seen[0].user.find("Cognitive Level: Apply"), std::string::npos);
  EXPECT_NE(rec.seen[1].user.find("rules count 6"), std::string::npos);
}

TEST(Solve, FailsAfterOneRepairAndKeepsLastReply) {
  Recorder rec({"garbage one", "garbage two"});
  std::string last;
  try {
    solve("s", kOpts, {}, RoutingCategory::kLow, rec, {}, &last);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSchema);
  }
  EXPECT_EQ(rec.seen.size(), 2u);
  EXPECT_EQ(last, "garbage two");
}

TEST(Solve, TruncationNotedInError) {
  llm::MockProvider m({{"solve", std::nullopt, "{\"schema\": \"LOW\", \"key_f", true}});
  try {
    solve("s", kOpts, {}, RoutingCategory::kLow, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("output budget"), std::string::npos);
  }
}

// ---------------------------------------------------------------- consistency

TEST(Consistency, Examples) {
  auto high = parse_proof(valid_high_json('C').dump(), RoutingCategory::kHigh);
  EXPECT_TRUE(check_consistency(high, 'C', nullptr).consistent);
  auto low = parse_proof(valid_low_json('C').dump(), RoutingCategory::kLow);
  EXPECT_FALSE(check_consistency(low, 'A', nullptr).consistent);
  auto j = valid_high_json('A');
  auto p = parse_proof(j.dump(), RoutingCategory::kHigh);
  auto r = check_consistency(p, 'A', nullptr);
  EXPECT_FALSE(r.consistent);
  EXPECT_FALSE(r.deterministic_ok);
}

TEST(Consistency, VerifierConjoinedAndUnparsedFlagged) {
  auto p = parse_proof(valid_high_json('C').dump(), RoutingCategory::kHigh);
  llm::MockProvider no({{"verify", std::nullopt, "No, it does not.", false}});
  auto r = check_consistency(p, 'C', &no);
  EXPECT_FALSE(r.consistent);
  EXPECT_TRUE(r.deterministic_ok);
  EXPECT_EQ(r.verifier, false);
  llm::MockProvider odd({{"verify", std::nullopt, "perhaps", false}});
  auto u = check_consistency(p, 'C', &odd);
  EXPECT_TRUE(u.consistent);
  EXPECT_TRUE(u.verifier_unparsed);
  Recorder rec({"yes"});
  EXPECT_TRUE(check_consistency(p, 'C', &rec).consistent);
  EXPECT_NE(rec.seen[0].user.find(serialize(p)), std::string::npos);
}

TEST(Consistency, AgreeingProofAlwaysConsistent) {
  Gen g(5);
  for (int t = 0; t < 500; ++t) {
    char a = "ABCD"[g.uniform(0, 3)];
    auto j = valid_high_json(a, g.uniform(2, 5));
    for (char c : {'A', 'B', 'C', 'D'}) {
      j["comparison"][std::string(1, c)] = c == a ? "supported" : g.pick(std::vector<std::string>{"unsupported", "incorrect", "neutral remark"});
    }
    auto p = parse_proof(j.dump(), RoutingCategory::kHigh);
    ASSERT_TRUE(check_consistency(p, a, nullptr).consistent);
    auto lp = parse_proof(valid_low_json(a).dump(), RoutingCategory::kLow);
    ASSERT_TRUE(check_consistency(lp, a, nullptr).consistent);
  }
}

TEST(ClassifyVerdict, Stances) {
  EXPECT_EQ(classify_verdict("Supported by rule 2"), Stance::kSupported);
  EXPECT_EQ(classify_verdict("unsupported"), Stance::kUnsupported);
  EXPECT_EQ(classify_verdict("Incorrect because..."), Stance::kUnsupported);
  EXPECT_EQ(classify_verdict("plausible"), Stance::kNeutral);
}

// ---------------------------------------------------------------- reselect

TEST(Reselect, Examples) {
  auto p = parse_proof(valid_high_json('C').dump(), RoutingCategory::kHigh);
  Recorder c({"C"});
  EXPECT_EQ(reselect(serialize(p), "s", kOpts, c), 'C');
  EXPECT_NE(c.seen[0].user.find(serialize(p)), std::string::npos);
  EXPECT_EQ(c.seen[0].max_new_tokens, 16);
  EXPECT_EQ(c.seen[0].tag, "reselect");
  Recorder b({"Answer: B."});
  EXPECT_EQ(reselect("{}", "s", kOpts, b), 'B');
  Recorder none({"none", "none"});
  try {
    reselect("{}", "s", kOpts, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kReselect);
  }
  EXPECT_EQ(none.seen.size(), 2u);
}

// ---------------------------------------------------------------- outcome

TEST(ClassifyOutcome, Examples) {
  auto p = parse_proof(valid_low_json('B').dump(), RoutingCategory::kLow);
  Attempt clean{SolveResult{p, 'B'}, true, std::nullopt, std::nullopt};
  auto o = classify_outcome(clean);
  EXPECT_EQ(o.status, Status::kAnswered);
  EXPECT_EQ(o.letter, 'B');
  EXPECT_FALSE(o.reselected);
  EXPECT_TRUE(o.proof.has_value());

  Attempt fixed{SolveResult{p, 'B'}, false, 'D', std::nullopt};
  auto f = classify_outcome(fixed);
  EXPECT_EQ(f.letter, 'D');
  EXPECT_TRUE(f.reselected);

  auto u = classify_outcome(Attempt{});
  EXPECT_EQ(u.status, Status::kUnanswered);
  EXPECT_FALSE(u.letter.has_value());

  EXPECT_EQ(classify_outcome(Attempt{std::nullopt, std::nullopt, 'A', std::nullopt}).letter, 'A');
  EXPECT_EQ(classify_outcome(Attempt{std::nullopt, std::nullopt, std::nullopt, 'C'}).letter, 'C');
  EXPECT_EQ(classify_outcome(Attempt{SolveResult{p, 'B'}, false, std::nullopt, std::nullopt}).letter, 'B');
}

TEST(ClassifyOutcome, AnsweredIffSomeLetter) {
  Gen g(3);
  auto p = parse_proof(valid_low_json('A').dump(), RoutingCategory::kLow);
  for (int t = 0; t < 1000; ++t) {
    Attempt a;
    if (g.coin()) a.solved = SolveResult{p, 'A'};
    if (a.solved && g.coin()) a.consistent = g.coin();
    if (g.coin()) a.reselected_letter = "ABCD"[g.uniform(0, 3)];
    if (g.coin()) a.direct_letter = "ABCD"[g.uniform(0, 3)];
    auto o = classify_outcome(a);
    bool any = a.solved || a.reselected_letter || a.direct_letter;
    ASSERT_EQ(o.status == Status::kAnswered, any);
    ASSERT_EQ(o.letter.has_value(), any);
    if (o.letter) ASSERT_TRUE(*o.letter >= 'A' && *o.letter <= 'D');
  }
}
