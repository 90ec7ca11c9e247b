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

// Shared fixtures for the contrastive-training tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "consensus/scl.hpp"

namespace fixture {

// Groups of `size` responses split evenly between labels "A" and "B"; each
// label draws its words from its own vocabulary.
inline std::vector<consensus::LabeledGroup> disjoint_vocab_dataset(std::size_t groups, std::size_t size,
                                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> word(0, 19);
  std::vector<consensus::LabeledGroup> out(groups);
  for (auto& g : out) {
    for (std::size_t i = 0; i < size; ++i) {
      const bool a = i % 2 == 0;
      std::string text;
      for (int w = 0; w < 6; ++w) text += (a ? " alpha" : " beta") + std::to_string(word(rng));
      g.responses.push_back(text);
      g.labels.push_back(a ? "A" : "B");
    }
  }
  return out;
}

struct CosineSplit {
  double intra = 0.0;
  double inter = 0.0;
};

// Mean pairwise cosine of summary embeddings within and across labels,
// computed from raw components.
inline CosineSplit cosine_split(const std::vector<consensus::LabeledGroup>& data, const consensus::SuffixEmbeddings& u,
                                const consensus::SclConfig& cfg) {
  std::vector<std::vector<double>> zs;
  std::vector<std::string> labels;
  for (const auto& g : data)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto z = consensus::toy_embed(g.responses[i], u, cfg);
      zs.emplace_back(z.values().begin(), z.values().end());
      labels.push_back(g.labels[i]);
    }
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = i + 1; j < zs.size(); ++j) {
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (std::size_t k = 0; k < zs[i].size(); ++k) {
        dot += zs[i][k] * zs[j][k];
        ni += zs[i][k] * zs[i][k];
        nj += zs[j][k] * zs[j][k];
      }
      const double c = dot / std::sqrt(ni * nj);
      if (labels[i] == labels[j]) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  return {intra / static_cast<double>(n_intra), inter / static_cast<double>(n_inter)};
}

// Brute-force contrastive loss from raw vectors.
inline double scl_loss(const std::vector<std::vector<double>>& z, const std::vector<std::string>& labels, double tau) {
  const std::size_t n = z.size();
  auto dot = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t k = 0; k < z[a].size(); ++k) s += z[a][k] * z[b][k];
    return s;
  };
  double total = 0.0;
  std::size_t anchors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) denom += std::exp(dot(i, k) / tau);
    double acc = 0.0;
    std::size_t positives = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && labels[j] == labels[i]) {
        acc += std::log(std::exp(dot(i, j) / tau) / denom);
        ++positives;
      }
    if (positives == 0) continue;
    total += acc / static_cast<double>(positives);
    ++anchors;
  }
  return -total / static_cast<double>(anchors);
}

// Random group of `n` responses over a small shared vocabulary, with labels
// drawn so that at least one pair shares a label.
inline consensus::LabeledGroup random_group(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> word(0, 11);
  std::uniform_int_distribution<int> length(1, 7);
  std::uniform_int_distribution<int> label(0, 2);
  consensus::LabeledGroup g;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const int len = length(rng);
    for (int w = 0; w < len; ++w) text += " w" + std::to_string(word(rng));
    g.responses.push_back(text);
    g.labels.push_back(i < 2 ? "L0" : "L" + std::to_string(label(rng)));
  }
  return g;
}

inline consensus::SuffixEmbeddings random_suffix(std::mt19937_64& rng, std::size_t tokens, std::size_t dim) {
  std::uniform_real_distribution<double> value(-0.5, 0.5);
  consensus::SuffixEmbeddings u(tokens, dim);
  for (double& x : u.values()) x = value(rng);
  return u;
}

// Entries whose analytic and numeric values are both below this are compared
// in absolute terms.
inline constexpr double kGradientFloor = 1e-6;

// Largest elementwise |analytic - numeric| / max(|analytic|, |numeric|, floor)
// against central differences of the forward loss.
inline double gradient_relative_error(const consensus::LabeledGroup& group, const consensus::SuffixEmbeddings& u,
                                      const consensus::SclConfig& cfg, double h) {
  const auto analytic = consensus::scl_gradient(group, u, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < u.values().size(); ++k) {
    auto plus = u;
    auto minus = u;
    plus.values()[k] += h;
    minus.values()[k] -= h;
    const double numeric =
        (consensus::scl_group_loss(group, plus, cfg) - consensus::scl_group_loss(group, minus, cfg)) / (2.0 * h);
    const double a = analytic.values()[k];
    const double scale = std::max({std::abs(a), std::abs(numeric), kGradientFloor});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  }
  return worst;
}

// Rows of the Cholesky factor of a positive-definite Gram matrix: unit
// vectors whose pairwise dot products reproduce it.
inline std::vector<std::vector<double>> gram_vectors(const std::vector<std::vector<double>>& gram) {
  const std::size_t n = gram.size();
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = gram[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = i == j ? std::sqrt(s) : s / l[j][j];
    }
  return l;
}

// N=4: a tight pair {0, 1}, a bridge 2 at 0.5 to everyone, and 3 far from the pair.
inline std::vector<std::vector<double>> bridge_similarity() {
  return {{1.0, 0.8, 0.5, 0.0}, {0.8, 1.0, 0.5, 0.0}, {0.5, 0.5, 1.0, 0.5}, {0.0, 0.0, 0.5, 1.0}};
}

}  // namespace fixture
