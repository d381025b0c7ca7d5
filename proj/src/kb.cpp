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

#include "cograg/kb.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cograg/error.hpp"
#include "cograg/text.hpp"

namespace cograg::kb {

namespace {

constexpr std::array<std::string_view, kTagCount> kCodes = {"T1", "T2", "T3", "T4", "T5", "T6"};
constexpr std::array<std::string_view, kTagCount> kLabels = {
    "dietary education",
    "healthcare",
    "food and nutrition",
    "individual and group nutrition management",
    "public nutrition and nutrition education",
    "catering management",
};

constexpr double kNormTolerance = 1e-6;
constexpr std::size_t kEmbedBatch = 64;

}  // namespace

std::string_view tag_code(Tag t) { return kCodes[static_cast<std::size_t>(t)]; }
std::string_view tag_label(Tag t) { return kLabels[static_cast<std::size_t>(t)]; }

std::optional<Tag> parse_tag(std::string_view code) {
  for (std::size_t i = 0; i < kTagCount; ++i) {
    if (kCodes[i] == code) return static_cast<Tag>(i);
  }
  return std::nullopt;
}

std::size_t TagSet::size() const {
  std::size_t n = 0;
  for (Tag t : kAllTags) n += contains(t) ? 1 : 0;
  return n;
}

std::vector<Tag> TagSet::tags() const {
  std::vector<Tag> out;
  for (Tag t : kAllTags) {
    if (contains(t)) out.push_back(t);
  }
  return out;
}

std::string TagSet::to_string() const {
  std::string out;
  for (Tag t : tags()) {
    if (!out.empty()) out += ',';
    out += tag_code(t);
  }
  return out;
}

TagSet TagSet::parse_list(std::string_view csv) {
  TagSet set;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    if (comma == std::string_view::npos) comma = csv.size();
    std::string code = text::trim(csv.substr(start, comma - start));
    if (!code.empty()) {
      auto t = parse_tag(code);
      if (!t) throw Error(Errc::kValidation, "unknown tag '" + code + "'");
      set.insert(*t);
    }
    start = comma + 1;
  }
  return set;
}

// ---------------------------------------------------------------- matrix

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::span<float> EmbeddingMatrix::row(std::size_t i) {
  return std::span<float>(data_).subspan(i * dim_, dim_);
}

// ---------------------------------------------------------------- kb

KnowledgeBase::KnowledgeBase(std::vector<QAEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    e.id = static_cast<EntryId>(i);
    if (text::trim(e.question).empty() || text::trim(e.answer).empty()) {
      throw Error(Errc::kValidation, "entry " + std::to_string(i) + ": empty question or answer");
    }
    if (e.tags.empty()) {
      throw Error(Errc::kValidation, "entry " + std::to_string(i) + ": no tags");
    }
    for (Tag t : e.tags.tags()) tag_index_[static_cast<std::size_t>(t)].push_back(e.id);
  }
}

void KnowledgeBase::set_embeddings(EmbeddingMatrix m) {
  if (m.rows() != entries_.size()) {
    throw Error(Errc::kValidation, "embedding rows " + std::to_string(m.rows()) +
                                       " != entries " + std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sq = 0.0;
    for (float x : m.row(i)) sq += static_cast<double>(x) * x;
    if (std::abs(std::sqrt(sq) - 1.0) > kNormTolerance) {
      throw Error(Errc::kValidation, "embedding row " + std::to_string(i) + " is not unit norm");
    }
  }
  embeddings_ = std::move(m);
}

std::string KnowledgeBase::document_text(const QAEntry& e) {
  return e.question + " " + e.answer;
}

// ---------------------------------------------------------------- ingest

KnowledgeBase ingest(std::istream& records) {
  std::vector<QAEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(records, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto where = "line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::kIngest, where + "malformed record");
    }
    QAEntry e;
    try {
      e.question = j.at("question").get<std::string>();
      e.answer = j.at("answer").get<std::string>();
      e.source = j.value("source", std::string{});
      for (const auto& code : j.at("tags")) {
        auto s = code.get<std::string>();
        auto t = parse_tag(s);
        if (!t) throw Error(Errc::kValidation, where + "unknown tag '" + s + "'");
        e.tags.insert(*t);
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::kIngest, where + "malformed record (" + ex.what() + ")");
    }
    if (text::trim(e.question).empty() || text::trim(e.answer).empty()) {
      throw Error(Errc::kValidation, where + "empty question or answer");
    }
    if (e.tags.empty()) throw Error(Errc::kValidation, where + "record has no tags");
    entries.push_back(std::move(e));
  }
  return KnowledgeBase(std::move(entries));
}

KnowledgeBase ingest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIngest, "cannot open corpus " + path);
  return ingest(in);
}

// ---------------------------------------------------------------- dedup

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

std::vector<QAEntry> deduplicate(const std::vector<QAEntry>& entries,
                                 const std::vector<std::vector<float>>& question_vectors,
                                 double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(Errc::kParameter, "dedup threshold must be in (0, 1]");
  }
  if (question_vectors.size() != entries.size()) {
    throw Error(Errc::kParameter, "one question vector per entry required");
  }
  const std::size_t n = entries.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Identical vectors count as cosine 1 regardless of float rounding.
      bool same = question_vectors[i] == question_vectors[j];
      if (same || dot(question_vectors[i], question_vectors[j]) >= threshold) {
        auto ri = find_root(parent, i);
        auto rj = find_root(parent, j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  // Group representative = smallest entry id in the group.
  std::vector<std::size_t> keeper(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = find_root(parent, i);
    if (keeper[r] == n || entries[i].id < entries[keeper[r]].id) keeper[r] = i;
  }
  std::vector<QAEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keeper[find_root(parent, i)] == i) out.push_back(entries[i]);
  }
  return out;
}

std::vector<QAEntry> deduplicate(const std::vector<QAEntry>& entries, llm::Embedder& embedder,
                                 double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(Errc::kParameter, "dedup threshold must be in (0, 1]");
  }
  std::vector<std::string> questions;
  questions.reserve(entries.size());
  for (const auto& e : entries) questions.push_back(e.question);
  std::vector<std::vector<float>> vectors;
  if (!questions.empty()) vectors = embedder.embed(questions);
  return deduplicate(entries, vectors, threshold);
}

// ---------------------------------------------------------------- embed

void embed_corpus(KnowledgeBase& kb, llm::Embedder& embedder) {
  const std::size_t n = kb.size();
  if (n == 0) {
    kb.set_embeddings(EmbeddingMatrix());
    return;
  }
  EmbeddingMatrix m(n, embedder.dimension());
  for (std::size_t begin = 0; begin < n; begin += kEmbedBatch) {
    std::size_t end = std::min(n, begin + kEmbedBatch);
    std::vector<std::string> batch;
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(KnowledgeBase::document_text(kb.entry(static_cast<EntryId>(i))));
    }
    std::vector<std::vector<float>> vecs;
    try {
      vecs = embedder.embed(batch);
    } catch (const Error& e) {
      throw Error(e.code(), "embedding entries " + std::to_string(begin) + ".." +
                                std::to_string(end - 1) + ": " + e.what());
    }
    for (std::size_t i = begin; i < end; ++i) {
      auto& v = vecs[i - begin];
      if (v.size() != m.dim()) {
        throw Error(Errc::kProvider, "entry " + std::to_string(i) + ": embedding dimension " +
                                         std::to_string(v.size()));
      }
      llm::normalize(v);
      std::copy(v.begin(), v.end(), m.row(i).begin());
    }
  }
  kb.set_embeddings(std::move(m));
}

std::vector<EntryId> candidate_pool(const KnowledgeBase& kb, TagSet tags) {
  std::vector<EntryId> out;
  for (Tag t : tags.tags()) {
    const auto& ids = kb.ids_for(t);
    std::vector<EntryId> merged;
    merged.reserve(out.size() + ids.size());
    std::set_union(out.begin(), out.end(), ids.begin(), ids.end(), std::back_inserter(merged));
    out = std::move(merged);
  }
  return out;
}

// ---------------------------------------------------------------- persistence

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    u32(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : buf_(std::move(bytes)) {}

  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw Error(Errc::kLoad, "truncated knowledge base file");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  float f32() {
    std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string_view peek(std::size_t n) const {
    need(n);
    return std::string_view(buf_).substr(pos_, n);
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_kb(const KnowledgeBase& kb, const std::string& path) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kFormatVersion);
  w.u64(kb.size());
  const auto& m = kb.embeddings();
  w.u32(static_cast<std::uint32_t>(m.empty() ? 0 : m.dim()));
  for (const auto& e : kb.entries()) {
    w.u32(e.id);
    w.str(e.question);
    w.str(e.answer);
    w.str(e.source);
    w.u8(e.tags.bits());
  }
  for (float f : m.data()) w.f32(f);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kParameter, "cannot write " + path);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error(Errc::kParameter, "write failed for " + path);
}

KnowledgeBase load_kb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kLoad, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Reader r(ss.str());

  if (r.peek(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw Error(Errc::kLoad, "version mismatch: bad magic");
  }
  r.skip(sizeof kMagic);
  if (auto v = r.u32(); v != kFormatVersion) {
    throw Error(Errc::kLoad, "version mismatch: file version " + std::to_string(v));
  }
  std::uint64_t count = r.u64();
  std::uint32_t dim = r.u32();

  std::vector<QAEntry> entries;
  for (std::uint64_t i = 0; i < count; ++i) {
    QAEntry e;
    e.id = r.u32();
    e.question = r.str();
    e.answer = r.str();
    e.source = r.str();
    e.tags = TagSet::from_bits(r.u8());
    if (e.id != i) throw Error(Errc::kLoad, "non-sequential entry id " + std::to_string(e.id));
    entries.push_back(std::move(e));
  }
  KnowledgeBase kb(std::move(entries));
  if (dim > 0) {
    EmbeddingMatrix m(count, dim);
    r.need(count * dim * sizeof(float));
    for (float& f : m.data()) f = r.f32();
    kb.set_embeddings(std::move(m));
  }
  if (!r.done()) throw Error(Errc::kLoad, "trailing bytes after embedding matrix");
  return kb;
}

}  // namespace cograg::kb
