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

#include "consensus/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "consensus/error.hpp"
#include "consensus/kernels.hpp"

namespace consensus {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidArgument, std::string(what) + " has a non-finite entry");
  }
}

}  // namespace

TokenStates::TokenStates(std::size_t count, std::size_t dim)
    : count_(count), dim_(dim), data_(count * dim, 0.0) {
  if (count == 0 || dim == 0) throw Error(ErrorKind::kInvalidArgument, "token states must be non-empty");
}

TokenStates TokenStates::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorKind::kInvalidArgument, "token states must be non-empty");
  }
  TokenStates states(rows.size(), rows.front().size());
  for (std::size_t m = 0; m < rows.size(); ++m) {
    if (rows[m].size() != states.dim_) {
      throw Error(ErrorKind::kDimensionMismatch, "state " + std::to_string(m) + " has " +
                                                      std::to_string(rows[m].size()) + " entries, expected " +
                                                      std::to_string(states.dim_));
    }
    require_finite(rows[m], "token state");
    std::copy(rows[m].begin(), rows[m].end(), states.row(m).begin());
  }
  return states;
}

Embedding Embedding::normalized(std::vector<double> values) {
  require_finite(values, "embedding");
  const double norm = std::sqrt(kernels::sum_squares(values));
  if (!(norm > kZeroNormThreshold)) {
    throw Error(ErrorKind::kZeroNorm, "vector norm " + std::to_string(norm) + " is below threshold");
  }
  kernels::scale(1.0 / norm, values);
  return Embedding(std::move(values));
}

SimilarityMatrix SimilarityMatrix::from_values(std::size_t n, std::vector<double> row_major) {
  if (n < 2) throw Error(ErrorKind::kTooFewCandidates, "similarity matrix needs at least 2 candidates");
  if (row_major.size() != n * n) {
    throw Error(ErrorKind::kInvalidArgument, "expected " + std::to_string(n * n) + " values");
  }
  require_finite(row_major, "similarity matrix");
  for (std::size_t i = 0; i < n; ++i) {
    row_major[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = row_major[i * n + j];
      const double b = row_major[j * n + i];
      if (std::abs(a - b) > 1e-9) {
        throw Error(ErrorKind::kInvalidArgument,
                    "matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (std::abs(a) > 1.0 + 1e-9) {
        throw Error(ErrorKind::kInvalidArgument, "similarity out of [-1, 1]");
      }
    }
  }
  return SimilarityMatrix(n, std::move(row_major));
}

Embedding mean_pool_normalize(const TokenStates& states) {
  std::vector<double> mean(states.dim(), 0.0);
  for (std::size_t m = 0; m < states.count(); ++m) kernels::axpy(1.0, states.row(m), mean);
  kernels::scale(1.0 / static_cast<double>(states.count()), mean);
  return Embedding::normalized(std::move(mean));
}

SimilarityMatrix cosine_similarity_matrix(std::span<const Embedding> embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw Error(ErrorKind::kTooFewCandidates, "need at least 2 embeddings, got " + std::to_string(n));
  const std::size_t dim = embeddings.front().dim();
  for (std::size_t i = 1; i < n; ++i) {
    if (embeddings[i].dim() != dim) {
      throw Error(ErrorKind::kDimensionMismatch, "embedding " + std::to_string(i) + " has dimension " +
                                                      std::to_string(embeddings[i].dim()) + ", expected " +
                                                      std::to_string(dim));
    }
  }
  std::vector<double> values(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = std::clamp(kernels::dot(embeddings[i].values(), embeddings[j].values()), -1.0, 1.0);
      values[i * n + j] = s;
      values[j * n + i] = s;
    }
  }
  return SimilarityMatrix(n, std::move(values));
}

}  // namespace consensus
