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

#include "consensus/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "consensus/error.hpp"

namespace consensus {
namespace {

void require_candidates(const SimilarityMatrix& sim) {
  if (sim.size() < 2) throw Error(ErrorKind::kTooFewCandidates, "selection needs at least 2 candidates");
}

void require_tau(const SelectionConfig& cfg) {
  if (!(cfg.tau_prime > 0.0) || !std::isfinite(cfg.tau_prime)) {
    throw Error(ErrorKind::kInvalidArgument, "tau_prime must be positive");
  }
}

// Off-diagonal entries of row i, sorted by descending similarity, ties by index.
std::vector<double> sorted_peers(const SimilarityMatrix& sim, std::size_t i) {
  const std::size_t n = sim.size();
  std::vector<std::size_t> order;
  order.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sim(i, a) > sim(i, b); });
  std::vector<double> peers(order.size());
  std::transform(order.begin(), order.end(), peers.begin(), [&](std::size_t j) { return sim(i, j); });
  return peers;
}

// prefix[i][K - 1] = w_i^(K) for K in [1, N - 1].
std::vector<std::vector<double>> topk_table(const SimilarityMatrix& sim) {
  const std::size_t n = sim.size();
  std::vector<std::vector<double>> table(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> peers = sorted_peers(sim, i);
    table[i].resize(peers.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < peers.size(); ++k) {
      sum += peers[k];
      table[i][k] = sum / static_cast<double>(k + 1);
    }
  }
  return table;
}

SelectionResult finish(const SimilarityMatrix& sim, std::vector<double> scores, Method method,
                       const SelectionConfig& cfg) {
  SelectionResult result;
  result.winner_index = argmax(scores, cfg.tie_break);
  result.scores = std::move(scores);
  result.method = method;
  result.confidence = confidence_of_selection(sim, result.winner_index);
  return result;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kLsc: return "lsc";
    case Method::kLscTopK: return "lsc-topk";
    case Method::kLscMean: return "lsc-mean";
    case Method::kSc: return "sc";
    case Method::kWucs: return "wucs";
    case Method::kUsc: return "usc";
    case Method::kRandom: return "random";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::kLsc, Method::kLscTopK, Method::kLscMean, Method::kSc, Method::kWucs, Method::kUsc,
                   Method::kRandom}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::size_t argmax(std::span<const double> scores, TieBreak /*tie_break*/) {
  if (scores.empty()) throw Error(ErrorKind::kTooFewCandidates, "argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

SelectionResult select_exp_weighted(const SimilarityMatrix& sim, const SelectionConfig& cfg) {
  require_candidates(sim);
  require_tau(cfg);
  const std::size_t n = sim.size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum += std::exp(sim(i, j) / cfg.tau_prime);
    }
    scores[i] = sum / static_cast<double>(n - 1);
  }
  return finish(sim, std::move(scores), Method::kLsc, cfg);
}

SelectionResult select_arithmetic_mean(const SimilarityMatrix& sim, const SelectionConfig& cfg) {
  require_candidates(sim);
  const std::size_t n = sim.size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum += sim(i, j);
    }
    scores[i] = sum / static_cast<double>(n - 1);
  }
  return finish(sim, std::move(scores), Method::kLscMean, cfg);
}

std::vector<double> topk_mean_scores(const SimilarityMatrix& sim, std::size_t k) {
  const std::size_t n = sim.size();
  if (k < 2 || k + 1 > n) {
    throw Error(ErrorKind::kKOutOfRange,
                "K=" + std::to_string(k) + " outside [2, " + std::to_string(n == 0 ? 0 : n - 1) + "]");
  }
  const auto table = topk_table(sim);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = table[i][k - 1];
  return scores;
}

TopKTrace dynamic_topk_trace(const SimilarityMatrix& sim) {
  require_candidates(sim);
  const std::size_t n = sim.size();
  TopKTrace trace;
  if (n == 2) return trace;

  const auto table = topk_table(sim);
  for (std::size_t k = 2; k <= n - 1; ++k) {
    double best = table[0][k - 1];
    for (std::size_t i = 1; i < n; ++i) best = std::max(best, table[i][k - 1]);
    trace.max_scores.push_back(best);
  }
  for (std::size_t k = 3; k <= n - 1; ++k) {
    trace.drops.push_back(trace.max_scores[k - 3] - trace.max_scores[k - 2]);
  }

  trace.k_star = n - 1;
  if (!trace.drops.empty()) {
    const double largest = trace.drops[argmax(trace.drops)];
    if (largest > kDropTolerance) {
      // Smallest K whose drop matches the largest; drops[b] belongs to K = b + 3
      // and the boundary sits one step earlier.
      std::size_t best = 0;
      while (trace.drops[best] < largest - kDropTolerance) ++best;
      trace.k_star = best + 2;
    }
  }
  return trace;
}

SelectionResult select_dynamic_topk(const SimilarityMatrix& sim, const SelectionConfig& cfg) {
  const TopKTrace trace = dynamic_topk_trace(sim);
  if (!trace.k_star) {
    SelectionResult result = select_arithmetic_mean(sim, cfg);
    result.method = Method::kLscTopK;
    return result;
  }
  SelectionResult result = finish(sim, topk_mean_scores(sim, *trace.k_star), Method::kLscTopK, cfg);
  result.k_star = trace.k_star;
  return result;
}

double confidence_of_selection(const SimilarityMatrix& sim, std::size_t winner) {
  const std::size_t n = sim.size();
  if (winner >= n) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "winner " + std::to_string(winner) + " outside [0, " + std::to_string(n) + ")");
  }
  if (n < 2) throw Error(ErrorKind::kTooFewCandidates, "confidence needs at least 2 candidates");
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != winner) sum += (sim(winner, j) + 1.0) / 2.0;
  }
  return std::clamp(sum / static_cast<double>(n - 1), 0.0, 1.0);
}

}  // namespace consensus
