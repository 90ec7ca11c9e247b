/*
 * Copyright 2026 The consensus-select Authors
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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace consensus {

enum class ErrorKind {
  kZeroNorm,
  kDimensionMismatch,
  kTooFewCandidates,
  kKOutOfRange,
  kIndexOutOfRange,
  kInvalidArgument,
  kNoExtractableAnswers,
  kNoPositivePairs,
  kLengthMismatch,
  kInfeasibleGeometry,
  kParseError,
  kSchemaError,
  kEmbeddingNormError,
  kMissingEmbeddings,
  kIoError,
  kNoPathToken,
  kTransportError,
  kJudgeFormatError,
};

std::string_view to_string(ErrorKind kind);

// Broad classes used by the CLI to pick an exit code.
enum class ErrorClass { kData, kMethod, kTransport };

ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  Error(ErrorKind kind, ErrorKind cause, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), cause_(cause) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Set when this error wraps a lower-level one (e.g. a judge reply that failed to parse).
  std::optional<ErrorKind> cause() const noexcept { return cause_; }

 private:
  ErrorKind kind_;
  std::optional<ErrorKind> cause_;
};

}  // namespace consensus
