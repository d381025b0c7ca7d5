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

#include <stdexcept>
#include <string>

namespace cograg {

enum class Errc {
  kParameter,
  kIngest,
  kValidation,
  kLoad,
  kProvider,
  kScript,
  kParse,
  kJudge,
  kRemediation,
  kSchema,
  kReselect,
  kData,
};

const char* errc_name(Errc code);

/// Single exception type for the library; `code()` tells callers which
/// stage failed so the pipeline can apply the stage's fallback rule.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cograg
