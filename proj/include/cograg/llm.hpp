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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cograg::llm {

inline constexpr double kDefaultTemperature = 0.0;
inline constexpr double kDefaultTopP = 0.7;
inline constexpr int kDefaultMaxNewTokens = 256;

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = kDefaultTemperature;
  double top_p = kDefaultTopP;
  int max_new_tokens = kDefaultMaxNewTokens;
  /// Routes mock replies; "<item>:<stage>" inside the pipeline.
  std::string tag;

  ChatRequest() = default;
  /// Throws Errc::kParameter when max_new_tokens < 1.
  ChatRequest(std::string system, std::string user, std::string tag,
              int max_new_tokens = kDefaultMaxNewTokens);
};

struct ChatResponse {
  std::string text;
  bool truncated = false;
  std::chrono::milliseconds latency{0};
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// One line per provider call or item outcome, appended under a lock.
class RunLog {
 public:
  RunLog() = default;
  explicit RunLog(const std::string& path);

  void append(const nlohmann::json& record);
  /// Everything appended so far, in append order.
  std::vector<nlohmann::json> records() const;

 private:
  mutable std::mutex mu_;
  std::vector<nlohmann::json> records_;
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file_{nullptr, &std::fclose};
};

// --------------------------------------------------------------------------
// Mock backend

struct ScriptRecord {
  std::string tag;
  std::optional<int> index;  ///< absent: reply for every ordinal of the tag
  std::string reply;
  bool truncated = false;
};

/// Scripted chat backend keyed by (tag, ordinal call index per tag).
///
/// Lookup order for a call with tag "item:stage" at ordinal n:
/// ("item:stage", n), ("item:stage", any), ("stage", n), ("stage", any).
class MockProvider : public ChatProvider {
 public:
  explicit MockProvider(std::vector<ScriptRecord> script);
  /// Line-delimited records with fields tag, index, reply, truncated.
  static MockProvider from_file(const std::string& path);
  static std::vector<ScriptRecord> load_script(const std::string& path);
  static std::vector<ScriptRecord> parse_script(std::string_view jsonl);

  ChatResponse complete(const ChatRequest& request) override;

  std::size_t calls(const std::string& tag) const;

 private:
  std::optional<ScriptRecord> find(const std::string& tag, int ordinal) const;

  std::map<std::pair<std::string, int>, ScriptRecord> exact_;
  std::map<std::string, ScriptRecord> any_;
  mutable std::mutex mu_;
  std::map<std::string, int> ordinals_;
};

// --------------------------------------------------------------------------
// Remote backend

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds base_delay{500};
};

struct RemoteConfig {
  std::string url;    ///< full chat-completions endpoint
  std::string key;    ///< bearer token, may be empty
  std::string model = "default";
  RetryPolicy retry;
  std::chrono::seconds timeout{120};

  /// Reads COGRAG_LLM_URL, COGRAG_LLM_KEY and optionally COGRAG_LLM_MODEL.
  static RemoteConfig from_env();
};

/// Chat-completions compatible HTTP backend.
class RemoteProvider : public ChatProvider {
 public:
  explicit RemoteProvider(RemoteConfig config);
  ChatResponse complete(const ChatRequest& request) override;

  /// Attempts made so far, including failed ones.
  std::size_t attempts() const { return attempts_; }

 private:
  RemoteConfig config_;
  std::size_t attempts_ = 0;
  std::mutex mu_;
};

/// Builds the request body sent by RemoteProvider.
nlohmann::json chat_request_body(const ChatRequest& request, const std::string& model);
/// Extracts text and finish reason from a chat-completions response body.
ChatResponse parse_chat_response(const nlohmann::json& body);

// --------------------------------------------------------------------------
// Provider decorators

/// Caps in-flight requests and writes every call to the run log.
class GatedProvider : public ChatProvider {
 public:
  GatedProvider(ChatProvider& inner, int max_concurrent, RunLog* log);
  ChatResponse complete(const ChatRequest& request) override;

  int peak_in_flight() const;

 private:
  ChatProvider& inner_;
  std::counting_semaphore<> slots_;
  RunLog* log_;
  mutable std::mutex mu_;
  int in_flight_ = 0;
  int peak_ = 0;
};

struct CallRecord {
  std::string stage;
  std::string system;
  std::string user;
  std::string reply;
  bool truncated = false;
  bool failed = false;
};

/// Per-item view of a provider: prefixes the stage tag with the item id and
/// records every call in order.
class SessionProvider : public ChatProvider {
 public:
  SessionProvider(ChatProvider& inner, std::string item_id);
  ChatResponse complete(const ChatRequest& request) override;

  const std::vector<CallRecord>& calls() const { return calls_; }
  std::size_t count(std::string_view stage) const;

 private:
  ChatProvider& inner_;
  std::string item_id_;
  std::vector<CallRecord> calls_;
};

// --------------------------------------------------------------------------
// Embedding backends

enum class EmbedderBackend { kRemote, kMockHash };

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual EmbedderBackend backend() const = 0;
  /// Unit vectors, one per text. Empty text is a parameter error.
  virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) = 0;

  std::vector<float> embed_one(const std::string& text);
};

inline constexpr std::uint64_t kDefaultHashSeed = 0x5eed'c0de'2026ULL;

/// Deterministic feature-hashing embedder for tests and offline runs.
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 256, std::uint64_t seed = kDefaultHashSeed);

  std::size_t dimension() const override { return dimension_; }
  EmbedderBackend backend() const override { return EmbedderBackend::kMockHash; }
  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;

 private:
  std::vector<float> embed_text(const std::string& text) const;

  std::size_t dimension_;
  std::uint64_t seed_;
};

struct RemoteEmbedderConfig {
  std::string url;
  std::string key;
  std::string model = "default";
  std::size_t dimension = 1024;
  RetryPolicy retry;

  /// Reads COGRAG_EMB_URL, COGRAG_LLM_KEY, COGRAG_EMB_MODEL, COGRAG_EMB_DIM.
  static RemoteEmbedderConfig from_env();
};

/// Embeddings-endpoint backend (OpenAI-compatible body).
class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);
  std::size_t dimension() const override { return config_.dimension; }
  EmbedderBackend backend() const override { return EmbedderBackend::kRemote; }
  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;

 private:
  RemoteEmbedderConfig config_;
};

/// In-place L2 normalization; zero vectors are left as zero.
void normalize(std::vector<float>& v);

// --------------------------------------------------------------------------
// Structured block parsing

/// Extracts the first balanced-brace object from `text` (code fences and
/// surrounding prose are skipped) and parses it as JSON. Throws
/// Errc::kParse with the offending offset.
nlohmann::json parse_structured_block(std::string_view text);

}  // namespace cograg::llm
