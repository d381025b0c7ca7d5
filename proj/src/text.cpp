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

#include "cograg/text.hpp"

#include <cctype>

#include "cograg/error.hpp"

namespace cograg {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kParameter: return "parameter";
    case Errc::kIngest: return "ingest";
    case Errc::kValidation: return "validation";
    case Errc::kLoad: return "load";
    case Errc::kProvider: return "provider";
    case Errc::kScript: return "script";
    case Errc::kParse: return "parse";
    case Errc::kJudge: return "judge";
    case Errc::kRemediation: return "remediation";
    case Errc::kSchema: return "schema";
    case Errc::kReselect: return "reselect";
    case Errc::kData: return "data";
  }
  return "unknown";
}

}  // namespace cograg

namespace cograg::text {

namespace {

bool is_token_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

// Length of a terminator starting at i, or 0.
std::size_t terminator_at(std::string_view s, std::size_t i) {
  char c = s[i];
  if (c == '.' || c == '!' || c == '?') return 1;
  // U+3002 IDEOGRAPHIC FULL STOP
  if (s.compare(i, 3, "\xE3\x80\x82") == 0) return 3;
  return 0;
}

bool boundary_after(std::string_view s, std::size_t end) {
  return end >= s.size() || is_space(static_cast<unsigned char>(s[end]));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80) ch = static_cast<char>(std::tolower(c));
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = terminator_at(s, i);
    if (len == 0) {
      ++i;
      continue;
    }
    // Runs like "?!" or "..." end one sentence.
    std::size_t end = i + len;
    while (end < s.size() && terminator_at(s, end) != 0) end += terminator_at(s, end);
    if (boundary_after(s, end)) {
      std::string piece = trim(s.substr(start, end - start));
      if (!piece.empty()) out.push_back(std::move(piece));
      start = end;
    }
    i = end;
  }
  std::string rest = trim(s.substr(start));
  if (!rest.empty()) out.push_back(std::move(rest));
  return out;
}

std::size_t count_terminators(std::string_view s) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = terminator_at(s, i);
    if (len == 0) {
      ++i;
      continue;
    }
    std::size_t end = i + len;
    while (end < s.size() && terminator_at(s, end) != 0) end += terminator_at(s, end);
    if (boundary_after(s, end)) ++n;
    i = end;
  }
  return n;
}

std::size_t whitespace_token_count(std::string_view s) {
  std::size_t n = 0;
  bool in_token = false;
  for (char ch : s) {
    bool sp = is_space(static_cast<unsigned char>(ch));
    if (!sp && !in_token) ++n;
    in_token = !sp;
  }
  return n;
}

std::string render(std::string_view tmpl,
                   const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.compare(i, 2, "{{") == 0) {
      std::size_t close = tmpl.find("}}", i + 2);
      if (close != std::string_view::npos) {
        std::string_view name = tmpl.substr(i + 2, close - i - 2);
        bool found = false;
        for (const auto& [k, v] : vars) {
          if (k == name) {
            out += v;
            found = true;
            break;
          }
        }
        if (found) {
          i = close + 2;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

}  // namespace cograg::text
