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

// Supervised contrastive training of the summary-token embeddings at toy scale.
//
// A frozen hashing featurizer stands in for the language model: each text maps
// to a fixed unit vector phi in R^d, and summary token m yields the final state
// h_m = tanh(phi * u_m) (elementwise). Only the K x d matrix u is trained.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "consensus/geometry.hpp"

namespace consensus {

struct LabeledGroup {
  std::vector<std::string> responses;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return responses.size(); }
  friend bool operator==(const LabeledGroup&, const LabeledGroup&) = default;
};

struct SclConfig {
  std::size_t tokens = 6;
  std::size_t dim = 64;
  double tau = 0.07;
  double learning_rate = 0.05;
  std::size_t steps = 200;
  std::uint64_t seed = 0;

  // Throws InvalidArgument when tau <= 0, tokens < 1, dim < 2 or lr <= 0.
  void validate() const;
};

// K x d matrix, row m is the embedding of summary token m. Gradients with
// respect to u use the same type.
class SuffixEmbeddings {
 public:
  SuffixEmbeddings(std::size_t tokens, std::size_t dim);

  // Entries i.i.d. uniform in [-0.1, 0.1] from cfg.seed.
  static SuffixEmbeddings seeded(const SclConfig& cfg);

  std::size_t tokens() const noexcept { return tokens_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(std::size_t m) const { return {values_.data() + m * dim_, dim_}; }
  std::span<double> row(std::size_t m) { return {values_.data() + m * dim_, dim_}; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  friend bool operator==(const SuffixEmbeddings&, const SuffixEmbeddings&) = default;

 private:
  std::size_t tokens_;
  std::size_t dim_;
  std::vector<double> values_;
};

// Hashed bag-of-unigrams, L2-normalized; all zeros for text without tokens.
std::vector<double> text_features(std::string_view text, std::size_t dim);

TokenStates toy_encode(std::string_view text, const SuffixEmbeddings& u, const SclConfig& cfg);

// Summary embedding of one text: mean_pool_normalize(toy_encode(...)).
Embedding toy_embed(std::string_view text, const SuffixEmbeddings& u, const SclConfig& cfg);

// Anchors without positives are skipped; the mean runs over the rest.
// Throws NoPositivePairs when no anchor has a positive.
double scl_loss(std::span<const Embedding> embeddings, std::span<const std::string> labels, double tau);

struct SclLossGradient {
  double loss = 0.0;
  // d loss / d z_i for every embedding, in input order.
  std::vector<std::vector<double>> embedding_grads;
};

SclLossGradient scl_loss_gradient(std::span<const Embedding> embeddings, std::span<const std::string> labels,
                                  double tau);

struct SclStep {
  double loss = 0.0;
  SuffixEmbeddings gradient;
};

// Loss of one group and its analytic gradient with respect to u.
SclStep scl_loss_and_gradient(const LabeledGroup& group, const SuffixEmbeddings& u, const SclConfig& cfg);

SuffixEmbeddings scl_gradient(const LabeledGroup& group, const SuffixEmbeddings& u, const SclConfig& cfg);

// Loss of one group at u (forward pass only).
double scl_group_loss(const LabeledGroup& group, const SuffixEmbeddings& u, const SclConfig& cfg);

struct TrainResult {
  SuffixEmbeddings u;
  // Entry e < steps is the mean of the per-group losses seen during epoch e
  // (each evaluated just before that group's update); the final entry is the
  // mean loss at the returned parameters.
  std::vector<double> loss_history;
};

// Full-batch gradient descent, one update per group, groups in input order.
TrainResult train_summary_embeddings(std::span<const LabeledGroup> dataset, const SclConfig& cfg);

// Drops responses whose label occurs exactly once.
LabeledGroup filter_singletons(const LabeledGroup& group);

enum class CapMode { kDropGroup, kDownsample };

// Enforces that no label holds more than half of the group.
std::optional<LabeledGroup> cap_majority(const LabeledGroup& group, CapMode mode, std::uint64_t seed);

struct SuffixFile {
  SuffixEmbeddings u;
  std::uint64_t seed = 0;
};

// Text format: "sclsuffix v1 K d seed" then K lines of d values.
void write_suffix(std::ostream& out, const SuffixEmbeddings& u, std::uint64_t seed);
SuffixFile read_suffix(std::istream& in);
void save_suffix(const std::string& path, const SuffixEmbeddings& u, std::uint64_t seed);
SuffixFile load_suffix(const std::string& path);

}  // namespace consensus
