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

#include "cograg/question.hpp"

#include <cctype>

#include "cograg/text.hpp"

namespace cograg {

std::string render_options(const Options& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) out += '\n';
    out += kLetters[i];
    out += ". ";
    out += options[i];
  }
  return out;
}

namespace {

bool word_end(std::string_view s, std::size_t i) {
  return i >= s.size() || !std::isalnum(static_cast<unsigned char>(s[i]));
}

std::optional<char> after_answer_keyword(std::string_view s, std::size_t pos) {
  auto skip = [&](auto pred) {
    while (pos < s.size() && pred(static_cast<unsigned char>(s[pos]))) ++pos;
  };
  auto spaces = [&] { skip([](unsigned char c) { return std::isspace(c) != 0 || c == '*'; }); };
  spaces();
  if ((s.compare(pos, 2, "is") == 0 || s.compare(pos, 2, "Is") == 0) && pos + 2 < s.size() &&
      std::isspace(static_cast<unsigned char>(s[pos + 2]))) {
    pos += 2;
    spaces();
  }
  if (pos < s.size() && (s[pos] == ':' || s[pos] == '-' || s[pos] == '=')) ++pos;
  spaces();
  if (pos < s.size() && (s[pos] == '(' || s[pos] == '[' || s[pos] == '"')) ++pos;
  if (pos < s.size() && is_letter(s[pos]) && word_end(s, pos + 1)) return s[pos];
  return std::nullopt;
}

}  // namespace

std::optional<char> extract_letter(std::string_view reply) {
  std::string lower = text::to_lower(reply);
  std::optional<char> found;
  for (std::size_t pos = lower.find("answer"); pos != std::string::npos;
       pos = lower.find("answer", pos + 1)) {
    if (auto l = after_answer_keyword(reply, pos + 6)) found = l;
  }
  if (found) return found;

  std::string t = text::trim(reply);
  while (!t.empty() && (t.front() == '*' || t.front() == '"' || t.front() == '`')) t.erase(0, 1);
  while (!t.empty() && (t.back() == '*' || t.back() == '"' || t.back() == '`')) t.pop_back();
  std::size_t i = 0;
  if (i < t.size() && t[i] == '(') ++i;
  if (i < t.size() && is_letter(t[i])) {
    char l = t[i];
    std::size_t j = i + 1;
    if (j == t.size() || t[j] == ')' || t[j] == '.' || t[j] == ':') return l;
  }
  return std::nullopt;
}

}  // namespace cograg
