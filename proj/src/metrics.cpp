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

#include "consensus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "consensus/error.hpp"
#include "consensus/kernels.hpp"
#include "consensus/format.hpp"

namespace consensus {
namespace {

constexpr std::size_t kMaxCenterAttempts = 10000;
constexpr std::uint64_t kRandomMethodStream = 0x72616e646f6dULL;

std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t trial, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dim, double sigma) {
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> v(dim);
  for (double& x : v) x = dist(rng);
  return v;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::vector<std::size_t> majority_set(std::span<const std::optional<ExtractedAnswer>> answers) {
  const VoteTally tally = tally_votes(answers);
  if (tally.counts.empty()) {
    throw Error(ErrorKind::kNoExtractableAnswers, "cannot form a majority set without extractable answers");
  }
  const std::string& mode = tally.counts[tally.modal()].first;
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (answers[i] && answers[i]->normalized == mode) members.push_back(i);
  }
  return members;
}

double consistency_score(std::span<const std::size_t> winners,
                         std::span<const std::vector<std::size_t>> majority_sets) {
  if (winners.size() != majority_sets.size()) {
    throw Error(ErrorKind::kLengthMismatch, std::to_string(winners.size()) + " selections but " +
                                                std::to_string(majority_sets.size()) + " majority sets");
  }
  if (winners.empty()) throw Error(ErrorKind::kInvalidArgument, "consistency of an empty list");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < winners.size(); ++q) {
    const auto& set = majority_sets[q];
    if (std::find(set.begin(), set.end(), winners[q]) != set.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(winners.size());
}

CalibrationReport ece(std::span<const double> confidences, const std::vector<bool>& correct, std::size_t n_bins) {
  if (confidences.size() != correct.size()) {
    throw Error(ErrorKind::kLengthMismatch, std::to_string(confidences.size()) + " confidences but " +
                                                std::to_string(correct.size()) + " outcomes");
  }
  if (n_bins < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one bin");

  CalibrationReport report;
  report.bins.resize(n_bins);
  const double width = static_cast<double>(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    report.bins[b].lower = static_cast<double>(b) / width;
    report.bins[b].upper = static_cast<double>(b + 1) / width;
  }
  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<double> hit_sum(n_bins, 0.0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "confidence " + std::to_string(c) + " outside [0, 1]");
    }
    std::size_t b = 0;
    while (b + 1 < n_bins && c > report.bins[b].upper) ++b;
    ++report.bins[b].count;
    conf_sum[b] += c;
    hit_sum[b] += correct[i] ? 1.0 : 0.0;
  }
  const double total = static_cast<double>(confidences.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& bin = report.bins[b];
    if (bin.count == 0) continue;
    const double count = static_cast<double>(bin.count);
    bin.mean_confidence = conf_sum[b] / count;
    bin.empirical_accuracy = hit_sum[b] / count;
    report.ece += count / total * std::abs(bin.mean_confidence - bin.empirical_accuracy);
  }
  return report;
}

void BenchConfig::validate() const {
  if (n_candidates < 2) throw Error(ErrorKind::kInvalidArgument, "need at least 2 candidates");
  if (majority_size < 2 || majority_size > n_candidates) {
    throw Error(ErrorKind::kInvalidArgument, "majority_size " + std::to_string(majority_size) +
                                                 " outside [2, " + std::to_string(n_candidates) + "]");
  }
  if (trials < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one trial");
  if (dimension < 2) throw Error(ErrorKind::kInvalidArgument, "dimension must be at least 2");
  if (!(separation >= 0.0 && separation <= 2.0)) {
    throw Error(ErrorKind::kInvalidArgument, "separation must lie in [0, 2]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorKind::kInvalidArgument, "noise_sigma must be non-negative");
  }
  if (minority_cluster_size < 1) throw Error(ErrorKind::kInvalidArgument, "minority clusters need a size");
}

ClusterInstance sample_cluster_instance(const BenchConfig& cfg, std::size_t trial) {
  cfg.validate();
  const std::size_t n = cfg.n_candidates;
  const std::size_t minority = n - cfg.majority_size;
  const std::size_t cluster_cap = std::min(cfg.minority_cluster_size, cfg.majority_size - 1);
  const std::size_t minority_centers = (minority + cluster_cap - 1) / cluster_cap;
  const std::size_t n_centers = 1 + minority_centers;
  const double max_cosine = 1.0 - cfg.separation;

  // k unit vectors cannot all have pairwise cosine below -1/(k-1).
  if (n_centers > 1 && max_cosine < -1.0 / static_cast<double>(n_centers - 1)) {
    throw Error(ErrorKind::kInfeasibleGeometry, std::to_string(n_centers) +
                                                    " centers cannot have pairwise cosine <= " +
                                                    std::to_string(max_cosine));
  }

  auto rng = trial_rng(cfg.seed, trial);
  ClusterInstance instance;
  bool placed = false;
  for (std::size_t attempt = 0; attempt < kMaxCenterAttempts && !placed; ++attempt) {
    instance.centers.clear();
    for (std::size_t c = 0; c < n_centers; ++c) {
      instance.centers.push_back(Embedding::normalized(gaussian_vector(rng, cfg.dimension, 1.0)));
    }
    placed = true;
    for (std::size_t a = 0; a < n_centers && placed; ++a) {
      for (std::size_t b = a + 1; b < n_centers && placed; ++b) {
        placed = kernels::dot(instance.centers[a].values(), instance.centers[b].values()) <= max_cosine;
      }
    }
  }
  if (!placed) {
    throw Error(ErrorKind::kInfeasibleGeometry,
                "could not place " + std::to_string(n_centers) + " centers with separation " +
                    std::to_string(cfg.separation) + " in dimension " + std::to_string(cfg.dimension));
  }

  std::vector<std::size_t> labels(n, 0);
  for (std::size_t k = 0; k < minority; ++k) labels[cfg.majority_size + k] = 1 + k % minority_centers;
  std::shuffle(labels.begin(), labels.end(), rng);

  instance.labels = labels;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> point = gaussian_vector(rng, cfg.dimension, cfg.noise_sigma);
    const auto center = instance.centers[labels[i]].values();
    for (std::size_t k = 0; k < cfg.dimension; ++k) point[k] += center[k];
    instance.embeddings.push_back(Embedding::normalized(std::move(point)));
    if (labels[i] == 0) instance.majority_indices.push_back(i);
  }
  return instance;
}

std::vector<SweepRow> run_consistency_sweep(std::span<const Method> methods, std::span<const std::size_t> sizes,
                                            const BenchConfig& cfg) {
  for (Method method : methods) {
    if (method != Method::kLsc && method != Method::kLscTopK && method != Method::kLscMean &&
        method != Method::kRandom) {
      throw Error(ErrorKind::kInvalidArgument,
                  "method '" + std::string(to_string(method)) + "' needs response text; not available in the sweep");
    }
  }
  std::vector<SweepRow> rows;
  const SelectionConfig selection;
  for (std::size_t size : sizes) {
    BenchConfig sized = cfg;
    sized.majority_size = size;
    sized.validate();
    std::vector<std::size_t> hits(methods.size(), 0);
    std::vector<double> k_star_sum(methods.size(), 0.0);
    std::vector<std::size_t> k_star_count(methods.size(), 0);

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      const ClusterInstance instance = sample_cluster_instance(sized, trial);
      const SimilarityMatrix sim = cosine_similarity_matrix(instance.embeddings);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        std::size_t winner = 0;
        switch (methods[m]) {
          case Method::kLsc: winner = select_exp_weighted(sim, selection).winner_index; break;
          case Method::kLscMean: winner = select_arithmetic_mean(sim, selection).winner_index; break;
          case Method::kLscTopK: {
            const SelectionResult r = select_dynamic_topk(sim, selection);
            winner = r.winner_index;
            if (r.k_star) {
              k_star_sum[m] += static_cast<double>(*r.k_star);
              ++k_star_count[m];
            }
            break;
          }
          default: {
            auto rng = trial_rng(cfg.seed, trial, kRandomMethodStream);
            winner = std::uniform_int_distribution<std::size_t>(0, cfg.n_candidates - 1)(rng);
            break;
          }
        }
        if (instance.labels[winner] == 0) ++hits[m];
      }
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      SweepRow row;
      row.method = methods[m];
      row.majority_size = size;
      row.trials = cfg.trials;
      row.consistency = static_cast<double>(hits[m]) / static_cast<double>(cfg.trials);
      if (k_star_count[m] > 0) row.mean_k_star = k_star_sum[m] / static_cast<double>(k_star_count[m]);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "method,majority_size,trials,consistency,mean_k_star\n";
  for (const auto& row : rows) {
    out << to_string(row.method) << ',' << row.majority_size << ',' << row.trials << ','
        << format_float(row.consistency) << ',';
    if (row.mean_k_star) out << format_float(*row.mean_k_star);
    out << '\n';
  }
}

double spearman_rank_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::kLengthMismatch, "rank correlation of unequal lengths");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace consensus
