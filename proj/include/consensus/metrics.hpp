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

// Consistency and calibration metrics, plus the synthetic planted-cluster
// benchmark used to study selection against majority set size.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "consensus/baselines.hpp"
#include "consensus/geometry.hpp"
#include "consensus/selection.hpp"

namespace consensus {

// Indices (ascending) of the candidates that carry the modal answer.
std::vector<std::size_t> majority_set(std::span<const std::optional<ExtractedAnswer>> answers);

// Fraction of items whose winner lies in the matching majority set.
double consistency_score(std::span<const std::size_t> winners,
                         std::span<const std::vector<std::size_t>> majority_sets);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double empirical_accuracy = 0.0;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double ece = 0.0;
};

// Equal-width bins over [0, 1]: [0, 1/B], (1/B, 2/B], ..., ((B-1)/B, 1].
CalibrationReport ece(std::span<const double> confidences, const std::vector<bool>& correct,
                      std::size_t n_bins = 10);

struct BenchConfig {
  std::size_t n_candidates = 10;
  std::size_t majority_size = 5;
  // Centers are drawn with pairwise cosine at most 1 - separation.
  double separation = 0.5;
  double noise_sigma = 0.05;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t dimension = 16;
  // Upper bound on the size of each minority cluster (capped at majority_size - 1).
  std::size_t minority_cluster_size = 1;

  void validate() const;
};

struct ClusterInstance {
  std::vector<Embedding> embeddings;
  // 0 is the majority cluster; minority clusters are numbered from 1.
  std::vector<std::size_t> labels;
  std::vector<std::size_t> majority_indices;
  std::vector<Embedding> centers;
};

// Deterministic in (cfg, trial). Throws InfeasibleGeometry when the centers
// cannot be placed.
ClusterInstance sample_cluster_instance(const BenchConfig& cfg, std::size_t trial);

struct SweepRow {
  Method method = Method::kLsc;
  std::size_t majority_size = 0;
  std::size_t trials = 0;
  double consistency = 0.0;
  std::optional<double> mean_k_star;
};

// Supported methods: lsc, lsc-topk, lsc-mean, random.
std::vector<SweepRow> run_consistency_sweep(std::span<const Method> methods, std::span<const std::size_t> sizes,
                                            const BenchConfig& cfg);

// Columns: method,majority_size,trials,consistency,mean_k_star
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

// Spearman rank correlation with average ranks for ties. Returns 0 when
// either input is constant.
double spearman_rank_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace consensus
