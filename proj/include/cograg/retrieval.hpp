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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cograg/kb.hpp"
#include "cograg/text.hpp"

namespace cograg::retrieval {

using kb::EntryId;

enum class Method { kBm25, kDense, kHybrid, kTagDense };

std::string_view method_name(Method m);

struct ScoredId {
  EntryId id = 0;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

/// Scores non-increasing, ids unique, ties ordered by ascending id.
struct RankedList {
  std::vector<ScoredId> items;
  Method method = Method::kDense;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  std::vector<EntryId> ids() const;

  bool operator==(const RankedList&) const = default;
};

inline constexpr double kDefaultK1 = 1.2;
inline constexpr double kDefaultB = 0.75;
inline constexpr int kDefaultRrfK = 60;
inline constexpr std::size_t kDefaultTopK = 5;
inline constexpr std::size_t kHybridDepth = 50;

/// Okapi BM25 over question + answer of every entry.
class Bm25Index {
 public:
  explicit Bm25Index(const kb::KnowledgeBase& kb);

  /// Top-K by BM25 (every document ranked, zero scores included); empty
  /// list when the query has no tokens.
  RankedList search(std::string_view query, std::size_t k, double k1 = kDefaultK1,
                    double b = kDefaultB) const;

  double idf(const std::string& term) const;
  std::size_t doc_count() const { return doc_len_.size(); }
  double avg_doc_len() const { return avgdl_; }

 private:
  struct Posting {
    EntryId doc;
    std::uint32_t tf;
  };
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_len_;
  double avgdl_ = 0.0;
};

/// Exact inner-product top-K. `pool` restricts candidates (sorted or not);
/// nullopt searches the whole corpus. Throws Errc::kParameter on a
/// dimension mismatch.
RankedList dense_search(const kb::KnowledgeBase& kb, std::span<const float> query_vec,
                        const std::optional<std::vector<EntryId>>& pool, std::size_t k);

/// Reciprocal rank fusion with 1-based ranks: score(d) = sum 1/(k + rank).
RankedList rrf_fuse(std::span<const RankedList> lists, int k, std::size_t top_k);

/// dense_search restricted to candidate_pool(kb, tags).
RankedList tag_constrained_search(const kb::KnowledgeBase& kb, llm::Embedder& embedder,
                                  std::string_view query, kb::TagSet tags, std::size_t k);

/// BM25 and full-corpus dense lists fused by RRF.
RankedList hybrid_search(const kb::KnowledgeBase& kb, const Bm25Index& bm25,
                         llm::Embedder& embedder, std::string_view query, std::size_t k,
                         int rrf_k = kDefaultRrfK, std::size_t depth = kHybridDepth);

// ---------------------------------------------------------------- evidence

struct Snippet {
  EntryId id = 0;
  std::string text;

  bool operator==(const Snippet&) const = default;
};

struct EvidenceBlock {
  std::vector<Snippet> snippets;
  std::size_t token_count = 0;
  std::size_t budget = 1;

  bool empty() const { return snippets.empty(); }
  std::vector<EntryId> ids() const;
  /// "[1] ...\n[2] ..." as placed into prompts.
  std::string render() const;

  bool operator==(const EvidenceBlock&) const = default;
};

/// Text shown for one knowledge-base entry.
std::string render_entry(const kb::QAEntry& e);

/// Two-level truncation: whole snippets while they fit, then the first
/// overflowing snippet cut at the last sentence boundary that fits (or
/// dropped), and nothing after it. Throws Errc::kParameter if budget == 0.
EvidenceBlock pack_snippets(std::vector<Snippet> snippets, std::size_t budget,
                            const text::TokenCounter& counter = text::whitespace_token_count);

EvidenceBlock format_evidence(const RankedList& ranked, const kb::KnowledgeBase& kb,
                              std::size_t budget,
                              const text::TokenCounter& counter = text::whitespace_token_count);

}  // namespace cograg::retrieval
