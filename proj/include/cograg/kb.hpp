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

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cograg/llm.hpp"

namespace cograg::kb {

/// Topic taxonomy of the knowledge base.
enum class Tag : std::uint8_t { T1 = 0, T2, T3, T4, T5, T6 };

inline constexpr std::size_t kTagCount = 6;
inline constexpr std::array<Tag, kTagCount> kAllTags = {Tag::T1, Tag::T2, Tag::T3,
                                                        Tag::T4, Tag::T5, Tag::T6};

std::string_view tag_code(Tag t);
std::string_view tag_label(Tag t);
/// "T1".."T6"; nullopt for anything else.
std::optional<Tag> parse_tag(std::string_view code);

/// Small value set of tags stored as a bitmask.
class TagSet {
 public:
  constexpr TagSet() = default;
  TagSet(std::initializer_list<Tag> tags) {
    for (Tag t : tags) insert(t);
  }
  static TagSet all() { return TagSet(0x3F); }
  static TagSet from_bits(std::uint8_t bits) { return TagSet(bits & 0x3F); }

  void insert(Tag t) { bits_ |= bit(t); }
  bool contains(Tag t) const { return (bits_ & bit(t)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  bool intersects(TagSet other) const { return (bits_ & other.bits_) != 0; }
  std::uint8_t bits() const { return bits_; }
  std::vector<Tag> tags() const;
  /// "T1,T3"
  std::string to_string() const;
  /// Comma-separated codes; throws Errc::kValidation on unknown codes.
  static TagSet parse_list(std::string_view csv);

  bool operator==(const TagSet&) const = default;

 private:
  explicit constexpr TagSet(std::uint8_t bits) : bits_(bits) {}
  static constexpr std::uint8_t bit(Tag t) {
    return static_cast<std::uint8_t>(1U << static_cast<unsigned>(t));
  }
  std::uint8_t bits_ = 0;
};

using EntryId = std::uint32_t;

struct QAEntry {
  EntryId id = 0;
  std::string question;
  std::string answer;
  std::string source;
  TagSet tags;

  bool operator==(const QAEntry&) const = default;
};

/// Row-major matrix of unit vectors, one row per entry.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_ == 0; }
  std::span<const float> row(std::size_t i) const;
  std::span<float> row(std::size_t i);
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

/// Tagged QA corpus with its inverted tag index and dense embeddings.
/// Mutable only while building; share as const afterwards.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  /// Assigns ids 0..n-1 in order and builds the tag index.
  explicit KnowledgeBase(std::vector<QAEntry> entries);

  const std::vector<QAEntry>& entries() const { return entries_; }
  const QAEntry& entry(EntryId id) const { return entries_.at(id); }
  std::size_t size() const { return entries_.size(); }

  /// Sorted ids carrying tag `t`.
  const std::vector<EntryId>& ids_for(Tag t) const {
    return tag_index_[static_cast<std::size_t>(t)];
  }

  const EmbeddingMatrix& embeddings() const { return embeddings_; }
  /// Throws Errc::kValidation unless rows == size() and every row is unit norm.
  void set_embeddings(EmbeddingMatrix m);

  /// Text embedded for an entry: question + " " + answer.
  static std::string document_text(const QAEntry& e);

  bool operator==(const KnowledgeBase&) const = default;

 private:
  std::vector<QAEntry> entries_;
  std::array<std::vector<EntryId>, kTagCount> tag_index_{};
  EmbeddingMatrix embeddings_;
};

/// Parses line-delimited records with question/answer/source/tags fields.
/// Blank lines are skipped. Malformed lines throw Errc::kIngest naming the
/// line; unknown tag codes throw Errc::kValidation.
KnowledgeBase ingest(std::istream& records);
KnowledgeBase ingest_file(const std::string& path);

/// Drops near-duplicate questions. Entries whose question embeddings have
/// cosine >= threshold are linked; each connected group keeps its lowest id.
/// Order is preserved; ids are kept as-is.
std::vector<QAEntry> deduplicate(const std::vector<QAEntry>& entries, llm::Embedder& embedder,
                                 double threshold);
/// Same, with question vectors supplied (unit norm, one per entry).
std::vector<QAEntry> deduplicate(const std::vector<QAEntry>& entries,
                                 const std::vector<std::vector<float>>& question_vectors,
                                 double threshold);

/// Fills the embedding matrix from document_text() of every entry.
void embed_corpus(KnowledgeBase& kb, llm::Embedder& embedder);

/// Union of tag_index over `tags`, sorted ascending.
std::vector<EntryId> candidate_pool(const KnowledgeBase& kb, TagSet tags);

inline constexpr char kMagic[4] = {'C', 'G', 'K', 'B'};
inline constexpr std::uint32_t kFormatVersion = 1;

void save_kb(const KnowledgeBase& kb, const std::string& path);
/// Throws Errc::kLoad ("truncated", "version mismatch", ...).
KnowledgeBase load_kb(const std::string& path);

}  // namespace cograg::kb
