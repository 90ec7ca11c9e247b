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

// Majority-answer selection over a cosine similarity matrix.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "consensus/geometry.hpp"

namespace consensus {

enum class Method { kLsc, kLscTopK, kLscMean, kSc, kWucs, kUsc, kRandom };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

enum class TieBreak { kLowestIndex };

struct SelectionConfig {
  double tau_prime = 0.5;
  TieBreak tie_break = TieBreak::kLowestIndex;
};

struct SelectionResult {
  std::size_t winner_index = 0;
  std::vector<double> scores;
  Method method = Method::kLsc;
  std::optional<std::size_t> k_star;
  double confidence = 0.0;
};

// Index of the maximum; the first maximal entry wins. Requires a non-empty span.
std::size_t argmax(std::span<const double> scores, TieBreak tie_break = TieBreak::kLowestIndex);

// w_i = sum_{j != i} exp(S_ij / tau') / (N - 1)
SelectionResult select_exp_weighted(const SimilarityMatrix& sim, const SelectionConfig& cfg = {});

// Ablation: plain mean of off-diagonal similarities.
SelectionResult select_arithmetic_mean(const SimilarityMatrix& sim, const SelectionConfig& cfg = {});

// Mean similarity of each response to its K most similar peers. Peers are
// ordered by descending similarity, ties by ascending index. Requires
// 2 <= K <= N - 1 (KOutOfRange otherwise).
std::vector<double> topk_mean_scores(const SimilarityMatrix& sim, std::size_t k);

// Intermediate quantities of the dynamic Top-K boundary search.
// Drops in the maximum top-K score smaller than this count as zero, and drops
// this close to the largest one tie with it. Prefix means of equal values can
// differ in the last bit, which would otherwise invent a boundary.
inline constexpr double kDropTolerance = 1e-12;

struct TopKTrace {
  // max_scores[K - 2] = max_i w_i^(K) for K in [2, N - 1].
  std::vector<double> max_scores;
  // drops[K - 3] = max_scores at K-1 minus max_scores at K, for K in [3, N - 1].
  std::vector<double> drops;
  // K just before the largest drop (smallest K on ties); N - 1 when no drop
  // exceeds kDropTolerance.
  // Absent for N = 2, where no admissible K exists.
  std::optional<std::size_t> k_star;
};

TopKTrace dynamic_topk_trace(const SimilarityMatrix& sim);

// Selects argmax_i w_i^(K*). Falls back to the arithmetic mean (K* = N - 1)
// when fewer than four candidates exist or no drop is positive.
SelectionResult select_dynamic_topk(const SimilarityMatrix& sim, const SelectionConfig& cfg = {});

// Mean of (S_winner,j + 1) / 2 over j != winner.
double confidence_of_selection(const SimilarityMatrix& sim, std::size_t winner);

}  // namespace consensus
