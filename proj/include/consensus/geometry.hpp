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

// Response embeddings and the pairwise cosine similarity matrix.

#include <cstddef>
#include <span>
#include <vector>

namespace consensus {

inline constexpr double kZeroNormThreshold = 1e-12;
inline constexpr double kUnitNormTolerance = 1e-9;

// K token state vectors of dimension d, stored row-major.
class TokenStates {
 public:
  TokenStates(std::size_t count, std::size_t dim);

  // Throws DimensionMismatch on ragged rows, InvalidArgument on empty input
  // or non-finite entries.
  static TokenStates from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t count() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(std::size_t m) const { return {data_.data() + m * dim_, dim_}; }
  std::span<double> row(std::size_t m) { return {data_.data() + m * dim_, dim_}; }

 private:
  std::size_t count_;
  std::size_t dim_;
  std::vector<double> data_;
};

// A unit-L2-norm vector.
class Embedding {
 public:
  // Scales `values` to unit norm. Throws ZeroNorm when the norm is at most
  // kZeroNormThreshold and InvalidArgument on non-finite entries.
  static Embedding normalized(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

// Symmetric N x N matrix with unit diagonal and entries in [-1, 1].
class SimilarityMatrix {
 public:
  // Validates symmetry (to 1e-9) and range, then assigns the diagonal to 1.
  // Throws TooFewCandidates when n < 2, InvalidArgument otherwise.
  static SimilarityMatrix from_values(std::size_t n, std::vector<double> row_major);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }

 private:
  friend SimilarityMatrix cosine_similarity_matrix(std::span<const Embedding>);
  SimilarityMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {}

  std::size_t n_;
  std::vector<double> values_;
};

// Normalized arithmetic mean of the K state vectors.
Embedding mean_pool_normalize(const TokenStates& states);

// S_ij = z_i . z_j clamped to [-1, 1], S_ii = 1.
SimilarityMatrix cosine_similarity_matrix(std::span<const Embedding> embeddings);

}  // namespace consensus
