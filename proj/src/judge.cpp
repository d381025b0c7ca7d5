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

#include "cograg/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "cograg/error.hpp"
#include "cograg/text.hpp"

namespace cograg::judge {

namespace {

int clamp_score(const nlohmann::json& v, const char* field) {
  double x = 0.0;
  if (v.is_number()) {
    x = v.get<double>();
  } else if (v.is_string()) {
    try {
      x = std::stod(v.get<std::string>());
    } catch (const std::exception&) {
      throw Error(Errc::kJudge, std::string("non-numeric ") + field);
    }
  } else {
    throw Error(Errc::kJudge, std::string("non-numeric ") + field);
  }
  if (!std::isfinite(x)) throw Error(Errc::kJudge, std::string("non-finite ") + field);
  return static_cast<int>(std::lround(std::clamp(x, 0.0, 100.0)));
}

std::string options_subset(const Options& options, std::pair<char, char> letters) {
  std::string out;
  for (char l : {letters.first, letters.second}) {
    if (!out.empty()) out += '\n';
    out += l;
    out += ". ";
    out += options[letter_index(l)];
  }
  return out;
}

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",    "by",   "for",  "from",
      "in",   "is",   "it",   "of",   "on",   "or",   "the",   "to",   "with", "all",
      "none", "both", "any",  "not",  "no",   "above", "below", "its",  "that", "this",
      "than", "more", "less", "most", "least", "only", "which", "should"};
  return words;
}

}  // namespace

std::string_view reason_name(TriggerReason r) {
  switch (r) {
    case TriggerReason::kNone: return "NONE";
    case TriggerReason::kRelevance: return "RELEVANCE";
    case TriggerReason::kMargin: return "MARGIN";
  }
  return "NONE";
}

JudgeVerdict parse_verdict(std::string_view reply) {
  nlohmann::json obj;
  try {
    obj = llm::parse_structured_block(reply);
  } catch (const Error& e) {
    throw Error(Errc::kJudge, std::string("judge reply: ") + e.what());
  }
  if (!obj.is_object()) throw Error(Errc::kJudge, "judge reply is not an object");
  JudgeVerdict v;
  if (!obj.contains("rel")) throw Error(Errc::kJudge, "judge reply lacks rel");
  v.rel = clamp_score(obj["rel"], "rel");
  if (!obj.contains("support")) throw Error(Errc::kJudge, "judge reply lacks support");
  const auto& s = obj["support"];
  if (s.is_array()) {
    if (s.size() != 4) throw Error(Errc::kJudge, "support must have 4 values");
    for (std::size_t i = 0; i < 4; ++i) v.support[i] = clamp_score(s[i], "support");
  } else if (s.is_object()) {
    for (std::size_t i = 0; i < 4; ++i) {
      std::string key(1, kLetters[i]);
      if (!s.contains(key)) throw Error(Errc::kJudge, "support lacks option " + key);
      v.support[i] = clamp_score(s[key], "support");
    }
  } else {
    throw Error(Errc::kJudge, "support must be a list of 4 values");
  }
  if (obj.contains("target") && obj["target"].is_string()) {
    std::string t = text::to_lower(obj["target"].get<std::string>());
    if (t.find("incorrect") != std::string::npos) {
      v.target = Target::kIncorrect;
    } else if (t.find("correct") != std::string::npos) {
      v.target = Target::kCorrect;
    } else {
      v.target_defaulted = true;
    }
  } else {
    v.target_defaulted = true;
  }
  return v;
}

JudgeVerdict judge(const std::string& stem, const Options& options,
                   const retrieval::EvidenceBlock& evidence, llm::ChatProvider& provider,
                   const cogpred::PromptRegistry& prompts) {
  std::string rendered = evidence.empty() ? std::string("(no evidence retrieved)") : evidence.render();
  llm::ChatRequest req(
      "",
      text::render(prompts.get("judge_rubric"),
                   {{"evidence", rendered}, {"stem", stem}, {"options", render_options(options)}}),
      "judge");
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto resp = provider.complete(req);
    try {
      return parse_verdict(resp.text);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error(Errc::kJudge, last_error);
}

TopTwo top_two_margin(const JudgeVerdict& verdict) {
  std::array<int, 4> eff = verdict.support;
  if (verdict.target == Target::kIncorrect) {
    for (int& s : eff) s = 100 - s;
  }
  std::array<std::size_t, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eff[a] > eff[b]; });
  TopTwo t;
  t.s1 = eff[order[0]];
  t.s2 = eff[order[1]];
  t.margin = t.s1 - t.s2;
  t.letters = {kLetters[order[0]], kLetters[order[1]]};
  return t;
}

TriggerDecision should_trigger(const JudgeVerdict& verdict, int alpha, int beta) {
  TriggerDecision d;
  d.top_two = top_two_margin(verdict);
  if (verdict.rel < alpha) {
    d.reason = TriggerReason::kRelevance;
  } else if (d.top_two.margin < beta) {
    d.reason = TriggerReason::kMargin;
  }
  d.triggered = d.reason != TriggerReason::kNone;
  return d;
}

// ---------------------------------------------------------------- queries

std::vector<std::string> parse_query_list(std::string_view reply) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start < reply.size()) {
    std::size_t nl = reply.find('\n', start);
    if (nl == std::string_view::npos) nl = reply.size();
    std::string line = text::trim(reply.substr(start, nl - start));
    start = nl + 1;

    std::size_t i = 0;
    bool marked = false;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')' || line[i] == ':')) {
      marked = true;
      ++i;
    } else if (i == 0 && !line.empty() && (line[0] == '-' || line[0] == '*')) {
      marked = true;
      i = 1;
    } else if (line.rfind("\xE2\x80\xA2", 0) == 0) {  // bullet
      marked = true;
      i = 3;
    }
    if (!marked) continue;
    std::string q = text::trim(std::string_view(line).substr(i));
    while (q.size() >= 2 && (q.front() == '"' || q.front() == '*') && q.back() == q.front()) {
      q = text::trim(std::string_view(q).substr(1, q.size() - 2));
    }
    if (q.empty()) continue;
    if (seen.insert(text::to_lower(q)).second) out.push_back(std::move(q));
  }
  return out;
}

std::vector<std::string> key_terms(const std::string& option_text) {
  std::vector<std::string> out;
  for (auto& tok : text::tokenize(option_text)) {
    if (tok.size() < 2 || stopwords().contains(tok)) continue;
    if (std::find(out.begin(), out.end(), tok) == out.end()) out.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> fact_centric_queries(const std::string& stem, const Options& options,
                                              llm::ChatProvider& provider,
                                              const cogpred::PromptRegistry& prompts) {
  llm::ChatRequest req(
      "", text::render(prompts.get("rr_low"), {{"stem", stem}, {"options", render_options(options)}}),
      "rr_low");
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto queries = parse_query_list(provider.complete(req).text);
    if (!queries.empty()) {
      if (queries.size() > kFactQueryCount) queries.resize(kFactQueryCount);
      return queries;
    }
  }
  throw Error(Errc::kRemediation, "no fact-centric queries parsed");
}

std::vector<std::string> option_centric_queries(const std::string& stem,
                                                std::pair<char, char> top_two,
                                                const Options& options,
                                                llm::ChatProvider& provider,
                                                const cogpred::PromptRegistry& prompts) {
  llm::ChatRequest req("",
                       text::render(prompts.get("rr_high"),
                                    {{"stem", stem},
                                     {"candidates", options_subset(options, top_two)},
                                     {"options", render_options(options)}}),
                       "rr_high");
  std::vector<std::string> terms = key_terms(options[letter_index(top_two.first)]);
  for (auto& t : key_terms(options[letter_index(top_two.second)])) terms.push_back(std::move(t));

  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<std::string> kept;
    for (auto& q : parse_query_list(provider.complete(req).text)) {
      bool mentions = terms.empty();
      for (const auto& tok : text::tokenize(q)) {
        if (std::find(terms.begin(), terms.end(), tok) != terms.end()) {
          mentions = true;
          break;
        }
      }
      if (mentions) kept.push_back(std::move(q));
    }
    if (!kept.empty()) {
      if (kept.size() > kOptionQueryMax) kept.resize(kOptionQueryMax);
      return kept;
    }
  }
  throw Error(Errc::kRemediation, "no option-centric queries parsed");
}

// ---------------------------------------------------------------- reinforce

std::vector<retrieval::Snippet> filter_redundant(std::vector<retrieval::Snippet> snippets,
                                                 const kb::KnowledgeBase& kb, double threshold) {
  const auto& m = kb.embeddings();
  std::vector<retrieval::Snippet> kept;
  for (auto& s : snippets) {
    bool redundant = false;
    for (const auto& k : kept) {
      if (k.id == s.id) {
        redundant = true;
        break;
      }
      if (!m.empty()) {
        auto a = m.row(k.id);
        auto b = m.row(s.id);
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
        if (dot >= threshold) {
          redundant = true;
          break;
        }
      }
    }
    if (!redundant) kept.push_back(std::move(s));
  }
  return kept;
}

ReinforceResult reinforce(const std::string& stem, const Options& options,
                          const JudgeVerdict& verdict, cogpred::RoutingCategory category,
                          const retrieval::EvidenceBlock& e1, const RemediationContext& ctx,
                          llm::ChatProvider& provider, const cogpred::PromptRegistry& prompts) {
  ReinforceResult result;
  try {
    if (category == cogpred::RoutingCategory::kLow) {
      result.queries = fact_centric_queries(stem, options, provider, prompts);
    } else {
      auto top = top_two_margin(verdict);
      result.queries = option_centric_queries(stem, top.letters, options, provider, prompts);
    }
  } catch (const Error& e) {
    result.evidence = e1;
    result.failed = true;
    result.error = e.what();
    return result;
  }

  std::vector<retrieval::Snippet> merged = e1.snippets;
  for (const auto& q : result.queries) {
    auto ranked = retrieval::tag_constrained_search(ctx.kb, ctx.embedder, q, ctx.tags,
                                                    kRemediationTopK);
    for (const auto& item : ranked.items) {
      merged.push_back({item.id, retrieval::render_entry(ctx.kb.entry(item.id))});
    }
  }
  merged = filter_redundant(std::move(merged), ctx.kb);
  result.evidence = retrieval::pack_snippets(std::move(merged), ctx.budget, ctx.counter);
  return result;
}

}  // namespace cograg::judge
