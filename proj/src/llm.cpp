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

#include "cograg/llm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cograg/error.hpp"
#include "cograg/text.hpp"

namespace cograg::llm {

ChatRequest::ChatRequest(std::string system, std::string user, std::string tag,
                         int max_new_tokens)
    : system(std::move(system)),
      user(std::move(user)),
      max_new_tokens(max_new_tokens),
      tag(std::move(tag)) {
  if (max_new_tokens < 1) {
    throw Error(Errc::kParameter, "max_new_tokens must be >= 1");
  }
}

// ---------------------------------------------------------------- RunLog

RunLog::RunLog(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw Error(Errc::kParameter, "cannot open run log " + path);
  file_.reset(f);
}

void RunLog::append(const nlohmann::json& record) {
  std::lock_guard lock(mu_);
  if (file_) {
    std::string line = record.dump() + "\n";
    std::fwrite(line.data(), 1, line.size(), file_.get());
    std::fflush(file_.get());
  }
  records_.push_back(record);
}

std::vector<nlohmann::json> RunLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

// ---------------------------------------------------------------- Mock

MockProvider::MockProvider(std::vector<ScriptRecord> script) {
  for (auto& r : script) {
    if (r.index) {
      exact_[{r.tag, *r.index}] = r;
    } else {
      any_[r.tag] = r;
    }
  }
}

std::vector<ScriptRecord> MockProvider::parse_script(std::string_view jsonl) {
  std::vector<ScriptRecord> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ScriptRecord r;
      r.tag = j.at("tag").get<std::string>();
      if (j.contains("index") && !j["index"].is_null()) r.index = j["index"].get<int>();
      r.reply = j.at("reply").get<std::string>();
      r.truncated = j.value("truncated", false);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kScript,
                  "mock script line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ScriptRecord> MockProvider::load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kData, "cannot open mock script " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_script(ss.str());
}

MockProvider MockProvider::from_file(const std::string& path) {
  return MockProvider(load_script(path));
}

std::optional<ScriptRecord> MockProvider::find(const std::string& tag, int ordinal) const {
  auto lookup = [&](const std::string& t) -> std::optional<ScriptRecord> {
    if (auto it = exact_.find({t, ordinal}); it != exact_.end()) return it->second;
    if (auto it = any_.find(t); it != any_.end()) return it->second;
    return std::nullopt;
  };
  if (auto r = lookup(tag)) return r;
  if (auto colon = tag.rfind(':'); colon != std::string::npos) {
    return lookup(tag.substr(colon + 1));
  }
  return std::nullopt;
}

ChatResponse MockProvider::complete(const ChatRequest& request) {
  int ordinal = 0;
  {
    std::lock_guard lock(mu_);
    ordinal = ordinals_[request.tag]++;
  }
  auto rec = find(request.tag, ordinal);
  if (!rec) {
    throw Error(Errc::kScript, "mock script exhausted for tag '" + request.tag +
                                   "' at index " + std::to_string(ordinal));
  }
  return ChatResponse{rec->reply, rec->truncated, std::chrono::milliseconds{0}};
}

std::size_t MockProvider::calls(const std::string& tag) const {
  std::lock_guard lock(mu_);
  auto it = ordinals_.find(tag);
  return it == ordinals_.end() ? 0 : static_cast<std::size_t>(it->second);
}

// ---------------------------------------------------------------- Gate

GatedProvider::GatedProvider(ChatProvider& inner, int max_concurrent, RunLog* log)
    : inner_(inner), slots_(max_concurrent < 1 ? 1 : max_concurrent), log_(log) {}

ChatResponse GatedProvider::complete(const ChatRequest& request) {
  slots_.acquire();
  {
    std::lock_guard lock(mu_);
    peak_ = std::max(peak_, ++in_flight_);
  }
  auto release = [&] {
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    slots_.release();
  };
  nlohmann::json rec = {{"kind", "call"},
                        {"tag", request.tag},
                        {"system", request.system},
                        {"user", request.user},
                        {"temperature", request.temperature},
                        {"top_p", request.top_p},
                        {"max_new_tokens", request.max_new_tokens}};
  try {
    ChatResponse resp = inner_.complete(request);
    release();
    if (log_ != nullptr) {
      rec["reply"] = resp.text;
      rec["truncated"] = resp.truncated;
      rec["ok"] = true;
      log_->append(rec);
    }
    return resp;
  } catch (const std::exception& e) {
    release();
    if (log_ != nullptr) {
      rec["ok"] = false;
      rec["error"] = e.what();
      log_->append(rec);
    }
    throw;
  }
}

int GatedProvider::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_;
}

// ---------------------------------------------------------------- Session

SessionProvider::SessionProvider(ChatProvider& inner, std::string item_id)
    : inner_(inner), item_id_(std::move(item_id)) {}

ChatResponse SessionProvider::complete(const ChatRequest& request) {
  ChatRequest tagged = request;
  tagged.tag = item_id_ + ":" + request.tag;
  CallRecord rec{request.tag, request.system, request.user, {}, false, false};
  try {
    ChatResponse resp = inner_.complete(tagged);
    rec.reply = resp.text;
    rec.truncated = resp.truncated;
    calls_.push_back(std::move(rec));
    return resp;
  } catch (...) {
    rec.failed = true;
    calls_.push_back(std::move(rec));
    throw;
  }
}

std::size_t SessionProvider::count(std::string_view stage) const {
  std::size_t n = 0;
  for (const auto& c : calls_) n += c.stage == stage ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------- Embedders

std::vector<float> Embedder::embed_one(const std::string& text) {
  auto v = embed({text});
  return std::move(v.front());
}

void normalize(std::vector<float>& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  if (sq == 0.0) return;
  double inv = 1.0 / std::sqrt(sq);
  for (float& x : v) x = static_cast<float>(x * inv);
}

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension == 0) throw Error(Errc::kParameter, "embedding dimension must be > 0");
}

std::vector<float> HashEmbedder::embed_text(const std::string& text) const {
  std::vector<double> acc(dimension_, 0.0);
  auto tokens = text::tokenize(text);
  if (!tokens.empty()) {
    for (const auto& tok : tokens) {
      std::uint64_t h = splitmix64(fnv1a(tok, seed_));
      std::size_t bucket = h % dimension_;
      double sign = (splitmix64(h) >> 63) != 0 ? -1.0 : 1.0;
      acc[bucket] += sign;
    }
  } else {
    std::uint64_t h = fnv1a(text, seed_);
    for (std::size_t i = 0; i < dimension_; ++i) {
      std::uint64_t r = splitmix64(h ^ splitmix64(i));
      acc[i] = static_cast<double>(r >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
  }
  double sq = 0.0;
  for (double x : acc) sq += x * x;
  double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
  std::vector<float> out(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

std::vector<std::vector<float>> HashEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (t.empty()) throw Error(Errc::kParameter, "cannot embed empty text");
    out.push_back(embed_text(t));
  }
  return out;
}

// ---------------------------------------------------------------- Parsing

nlohmann::json parse_structured_block(std::string_view text) {
  std::size_t start = text.find('{');
  if (start == std::string_view::npos) {
    throw Error(Errc::kParse, "no structured object found (offset " +
                                  std::to_string(text.size()) + ")");
  }
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  std::size_t end = std::string_view::npos;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) {
        end = i + 1;
        break;
      }
    }
  }
  if (end == std::string_view::npos) {
    throw Error(Errc::kParse, "unterminated object starting at offset " + std::to_string(start));
  }
  try {
    return nlohmann::json::parse(text.substr(start, end - start));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kParse, "malformed object at offset " +
                                  std::to_string(start + (e.byte > 0 ? e.byte - 1 : 0)));
  }
}

}  // namespace cograg::llm
