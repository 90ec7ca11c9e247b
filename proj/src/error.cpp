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

#include "consensus/error.hpp"

namespace consensus {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kZeroNorm: return "ZeroNorm";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kTooFewCandidates: return "TooFewCandidates";
    case ErrorKind::kKOutOfRange: return "KOutOfRange";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kNoExtractableAnswers: return "NoExtractableAnswers";
    case ErrorKind::kNoPositivePairs: return "NoPositivePairs";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kInfeasibleGeometry: return "InfeasibleGeometry";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kSchemaError: return "SchemaError";
    case ErrorKind::kEmbeddingNormError: return "EmbeddingNormError";
    case ErrorKind::kMissingEmbeddings: return "MissingEmbeddings";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kNoPathToken: return "NoPathToken";
    case ErrorKind::kTransportError: return "TransportError";
    case ErrorKind::kJudgeFormatError: return "JudgeFormatError";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParseError:
    case ErrorKind::kSchemaError:
    case ErrorKind::kEmbeddingNormError:
    case ErrorKind::kMissingEmbeddings:
    case ErrorKind::kIoError:
    case ErrorKind::kLengthMismatch:
      return ErrorClass::kData;
    case ErrorKind::kTransportError:
      return ErrorClass::kTransport;
    default:
      return ErrorClass::kMethod;
  }
}

}  // namespace consensus
