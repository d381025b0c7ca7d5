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

#include "cograg/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cograg/error.hpp"

namespace cograg::retrieval {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kBm25: return "bm25";
    case Method::kDense: return "dense";
    case Method::kHybrid: return "hybrid";
    case Method::kTagDense: return "tag_dense";
  }
  return "unknown";
}

std::vector<EntryId> RankedList::ids() const {
  std::vector<EntryId> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.id);
  return out;
}

namespace {

bool by_score_then_id(const ScoredId& a, const ScoredId& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

void keep_top(std::vector<ScoredId>& scored, std::size_t k) {
  std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    by_score_then_id);
  scored.resize(n);
}

}  // namespace

// ---------------------------------------------------------------- BM25

Bm25Index::Bm25Index(const kb::KnowledgeBase& kb) {
  doc_len_.reserve(kb.size());
  std::uint64_t total = 0;
  for (const auto& e : kb.entries()) {
    auto tokens = text::tokenize(kb::KnowledgeBase::document_text(e));
    doc_len_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total += tokens.size();
    std::map<std::string, std::uint32_t> tf;
    for (auto& t : tokens) ++tf[t];
    for (auto& [term, f] : tf) postings_[term].push_back({e.id, f});
  }
  avgdl_ = doc_len_.empty() ? 0.0 : static_cast<double>(total) / doc_len_.size();
}

double Bm25Index::idf(const std::string& term) const {
  auto it = postings_.find(term);
  double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  double n = static_cast<double>(doc_len_.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

RankedList Bm25Index::search(std::string_view query, std::size_t k, double k1, double b) const {
  RankedList out{{}, Method::kBm25};
  auto terms = text::tokenize(query);
  if (terms.empty() || k == 0) return out;
  std::vector<double> scores(doc_len_.size(), 0.0);
  for (const auto& term : terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    double w = idf(term);
    for (const auto& p : it->second) {
      double tf = p.tf;
      double norm = k1 * (1.0 - b + b * doc_len_[p.doc] / avgdl_);
      scores[p.doc] += w * tf * (k1 + 1.0) / (tf + norm);
    }
  }
  std::vector<ScoredId> scored;
  scored.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scored.push_back({static_cast<EntryId>(i), scores[i]});
  }
  keep_top(scored, k);
  out.items = std::move(scored);
  return out;
}

// ---------------------------------------------------------------- dense

RankedList dense_search(const kb::KnowledgeBase& kb, std::span<const float> query_vec,
                        const std::optional<std::vector<EntryId>>& pool, std::size_t k) {
  RankedList out{{}, pool ? Method::kTagDense : Method::kDense};
  const auto& m = kb.embeddings();
  if (kb.size() > 0 && m.empty()) {
    throw Error(Errc::kParameter, "knowledge base has no embeddings");
  }
  if (!m.empty() && query_vec.size() != m.dim()) {
    throw Error(Errc::kParameter, "query dimension " + std::to_string(query_vec.size()) +
                                      " != index dimension " + std::to_string(m.dim()));
  }
  auto score = [&](EntryId id) {
    auto row = m.row(id);
    double s = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) s += static_cast<double>(query_vec[i]) * row[i];
    return s;
  };
  std::vector<ScoredId> scored;
  if (pool) {
    scored.reserve(pool->size());
    for (EntryId id : *pool) {
      if (id >= kb.size()) throw Error(Errc::kParameter, "pool id out of range");
      scored.push_back({id, score(id)});
    }
  } else {
    scored.reserve(kb.size());
    for (EntryId id = 0; id < kb.size(); ++id) scored.push_back({id, score(id)});
  }
  keep_top(scored, k);
  out.items = std::move(scored);
  return out;
}

RankedList rrf_fuse(std::span<const RankedList> lists, int k, std::size_t top_k) {
  std::map<EntryId, double> fused;
  for (const auto& list : lists) {
    for (std::size_t r = 0; r < list.items.size(); ++r) {
      fused[list.items[r].id] += 1.0 / (static_cast<double>(k) + static_cast<double>(r + 1));
    }
  }
  std::vector<ScoredId> scored;
  scored.reserve(fused.size());
  for (auto [id, s] : fused) scored.push_back({id, s});
  keep_top(scored, top_k);
  return RankedList{std::move(scored), Method::kHybrid};
}

RankedList tag_constrained_search(const kb::KnowledgeBase& kb, llm::Embedder& embedder,
                                  std::string_view query, kb::TagSet tags, std::size_t k) {
  auto pool = kb::candidate_pool(kb, tags);
  if (pool.empty()) return RankedList{{}, Method::kTagDense};
  auto q = embedder.embed_one(std::string(query));
  auto out = dense_search(kb, q, std::optional<std::vector<EntryId>>(std::move(pool)), k);
  out.method = Method::kTagDense;
  return out;
}

RankedList hybrid_search(const kb::KnowledgeBase& kb, const Bm25Index& bm25,
                         llm::Embedder& embedder, std::string_view query, std::size_t k,
                         int rrf_k, std::size_t depth) {
  std::size_t d = std::max(k, depth);
  std::vector<RankedList> lists;
  lists.push_back(bm25.search(query, d));
  auto q = embedder.embed_one(std::string(query));
  lists.push_back(dense_search(kb, q, std::nullopt, d));
  return rrf_fuse(lists, rrf_k, k);
}

// ---------------------------------------------------------------- evidence

std::vector<EntryId> EvidenceBlock::ids() const {
  std::vector<EntryId> out;
  for (const auto& s : snippets) out.push_back(s.id);
  return out;
}

std::string EvidenceBlock::render() const {
  std::string out;
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    if (i > 0) out += '\n';
    out += "[" + std::to_string(i + 1) + "] " + snippets[i].text;
  }
  return out;
}

std::string render_entry(const kb::QAEntry& e) {
  return "Q: " + e.question + " A: " + e.answer;
}

EvidenceBlock pack_snippets(std::vector<Snippet> snippets, std::size_t budget,
                            const text::TokenCounter& counter) {
  if (budget == 0) throw Error(Errc::kParameter, "evidence budget must be >= 1");
  EvidenceBlock block;
  block.budget = budget;
  for (auto& s : snippets) {
    std::size_t n = counter(s.text);
    if (block.token_count + n <= budget) {
      block.token_count += n;
      block.snippets.push_back(std::move(s));
      continue;
    }
    // First overflow: cut at the last sentence boundary that fits.
    std::size_t room = budget - block.token_count;
    std::string kept;
    std::size_t kept_tokens = 0;
    for (const auto& sentence : text::split_sentences(s.text)) {
      std::string candidate = kept.empty() ? sentence : kept + " " + sentence;
      std::size_t c = counter(candidate);
      if (c > room) break;
      kept = std::move(candidate);
      kept_tokens = c;
    }
    if (!kept.empty()) {
      block.token_count += kept_tokens;
      block.snippets.push_back({s.id, std::move(kept)});
    }
    break;
  }
  return block;
}

EvidenceBlock format_evidence(const RankedList& ranked, const kb::KnowledgeBase& kb,
                              std::size_t budget, const text::TokenCounter& counter) {
  std::vector<Snippet> snippets;
  snippets.reserve(ranked.size());
  for (const auto& it : ranked.items) snippets.push_back({it.id, render_entry(kb.entry(it.id))});
  return pack_snippets(std::move(snippets), budget, counter);
}

}  // namespace cograg::retrieval
