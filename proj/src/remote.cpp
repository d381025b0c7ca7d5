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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "cograg/error.hpp"
#include "cograg/llm.hpp"

namespace cograg::llm {

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : std::move(fallback);
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::kParameter, "endpoint URL needs a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// POSTs `body` with retries on transport failures, 429 and 5xx.
nlohmann::json post_json(const std::string& url, const std::string& key,
                         const nlohmann::json& body, const RetryPolicy& retry,
                         std::chrono::seconds timeout, std::size_t* attempts) {
  Endpoint ep = split_url(url);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(retry.base_delay * (1 << (attempt - 1)));
    if (attempts != nullptr) ++*attempts;
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(Errc::kProvider, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kProvider, std::string("malformed response body: ") + e.what());
    }
  }
  throw Error(Errc::kProvider, "request failed after " +
                                   std::to_string(retry.max_retries + 1) +
                                   " attempts: " + last_error);
}

}  // namespace

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  c.url = env_or("COGRAG_LLM_URL", "");
  c.key = env_or("COGRAG_LLM_KEY", "");
  c.model = env_or("COGRAG_LLM_MODEL", "default");
  if (c.url.empty()) throw Error(Errc::kParameter, "COGRAG_LLM_URL is not set");
  return c;
}

RemoteEmbedderConfig RemoteEmbedderConfig::from_env() {
  RemoteEmbedderConfig c;
  c.url = env_or("COGRAG_EMB_URL", "");
  c.key = env_or("COGRAG_LLM_KEY", "");
  c.model = env_or("COGRAG_EMB_MODEL", "default");
  c.dimension = static_cast<std::size_t>(std::stoul(env_or("COGRAG_EMB_DIM", "1024")));
  if (c.url.empty()) throw Error(Errc::kParameter, "COGRAG_EMB_URL is not set");
  return c;
}

nlohmann::json chat_request_body(const ChatRequest& request, const std::string& model) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  // Greedy decoding makes top_p inert; it is still sent as configured.
  return {{"model", model},
          {"messages", messages},
          {"temperature", request.temperature},
          {"top_p", request.top_p},
          {"max_tokens", request.max_new_tokens},
          {"stream", false}};
}

ChatResponse parse_chat_response(const nlohmann::json& body) {
  try {
    const auto& choice = body.at("choices").at(0);
    ChatResponse resp;
    const auto& content = choice.at("message").at("content");
    resp.text = content.is_null() ? "" : content.get<std::string>();
    auto reason = choice.value("finish_reason", nlohmann::json());
    resp.truncated = reason.is_string() && reason.get<std::string>() == "length";
    return resp;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kProvider, std::string("unexpected chat response shape: ") + e.what());
  }
}

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) {}

ChatResponse RemoteProvider::complete(const ChatRequest& request) {
  auto started = std::chrono::steady_clock::now();
  std::size_t attempts = 0;
  nlohmann::json body;
  try {
    body = post_json(config_.url, config_.key, chat_request_body(request, config_.model),
                     config_.retry, config_.timeout, &attempts);
  } catch (...) {
    std::lock_guard lock(mu_);
    attempts_ += attempts;
    throw;
  }
  {
    std::lock_guard lock(mu_);
    attempts_ += attempts;
  }
  ChatResponse resp = parse_chat_response(body);
  resp.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  return resp;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {}

std::vector<std::vector<float>> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
  for (const auto& t : texts) {
    if (t.empty()) throw Error(Errc::kParameter, "cannot embed empty text");
  }
  nlohmann::json body = {{"model", config_.model}, {"input", texts}};
  auto resp = post_json(config_.url, config_.key, body, config_.retry,
                        std::chrono::seconds{120}, nullptr);
  std::vector<std::vector<float>> out;
  try {
    const auto& data = resp.at("data");
    if (data.size() != texts.size()) {
      throw Error(Errc::kProvider, "embedding count mismatch");
    }
    for (const auto& item : data) {
      auto v = item.at("embedding").get<std::vector<float>>();
      if (v.size() != config_.dimension) {
        throw Error(Errc::kProvider, "embedding dimension " + std::to_string(v.size()) +
                                         " != configured " +
                                         std::to_string(config_.dimension));
      }
      normalize(v);
      out.push_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kProvider, std::string("unexpected embeddings response: ") + e.what());
  }
  return out;
}

}  // namespace cograg::llm
