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

#include "consensus/scl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "consensus/baselines.hpp"
#include "consensus/error.hpp"
#include "consensus/kernels.hpp"

namespace consensus {
namespace {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void require_labels(std::size_t n_embeddings, std::size_t n_labels) {
  if (n_embeddings != n_labels) {
    throw Error(ErrorKind::kLengthMismatch, std::to_string(n_embeddings) + " embeddings but " +
                                                std::to_string(n_labels) + " labels");
  }
  if (n_embeddings < 2) throw Error(ErrorKind::kTooFewCandidates, "contrastive loss needs at least 2 responses");
}

// Forward state of one response, kept for the backward pass.
struct Encoded {
  std::vector<double> features;
  TokenStates states;
  double pooled_norm = 0.0;
  Embedding z;
};

Encoded encode(std::string_view text, const SuffixEmbeddings& u, const SclConfig& cfg) {
  std::vector<double> features = text_features(text, cfg.dim);
  TokenStates states = toy_encode(text, u, cfg);
  std::vector<double> mean(cfg.dim, 0.0);
  for (std::size_t m = 0; m < cfg.tokens; ++m) kernels::axpy(1.0, states.row(m), mean);
  kernels::scale(1.0 / static_cast<double>(cfg.tokens), mean);
  const double norm = std::sqrt(kernels::sum_squares(mean));
  Embedding z = Embedding::normalized(std::move(mean));
  return Encoded{std::move(features), std::move(states), norm, std::move(z)};
}

void require_shape(const SuffixEmbeddings& u, const SclConfig& cfg) {
  cfg.validate();
  if (u.tokens() != cfg.tokens || u.dim() != cfg.dim) {
    throw Error(ErrorKind::kDimensionMismatch, "suffix embeddings are " + std::to_string(u.tokens()) + "x" +
                                                    std::to_string(u.dim()) + ", config expects " +
                                                    std::to_string(cfg.tokens) + "x" + std::to_string(cfg.dim));
  }
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void SclConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorKind::kInvalidArgument, "tau must be positive");
  if (tokens < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one summary token");
  if (dim < 2) throw Error(ErrorKind::kInvalidArgument, "embedding dimension must be at least 2");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kInvalidArgument, "learning rate must be positive");
}

SuffixEmbeddings::SuffixEmbeddings(std::size_t tokens, std::size_t dim)
    : tokens_(tokens), dim_(dim), values_(tokens * dim, 0.0) {}

SuffixEmbeddings SuffixEmbeddings::seeded(const SclConfig& cfg) {
  cfg.validate();
  SuffixEmbeddings u(cfg.tokens, cfg.dim);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  for (double& v : u.values_) v = dist(rng);
  return u;
}

std::vector<double> text_features(std::string_view text, std::size_t dim) {
  std::vector<double> features(dim, 0.0);
  for (const auto& token : tokenize_unigrams(text)) features[fnv1a(token) % dim] += 1.0;
  const double norm = std::sqrt(kernels::sum_squares(features));
  if (norm > 0.0) kernels::scale(1.0 / norm, features);
  return features;
}

TokenStates toy_encode(std::string_view text, const SuffixEmbeddings& u, const SclConfig& cfg) {
  require_shape(u, cfg);
  const std::vector<double> features = text_features(text, cfg.dim);
  TokenStates states(cfg.tokens, cfg.dim);
  for (std::size_t m = 0; m < cfg.tokens; ++m) {
    const auto um = u.row(m);
    auto hm = states.row(m);
    for (std::size_t k = 0; k < cfg.dim; ++k) hm[k] = std::tanh(features[k] * um[k]);
  }
  return states;
}

Embedding toy_embed(std::string_view text, const SuffixEmbeddings& u, const SclConfig& cfg) {
  return mean_pool_normalize(toy_encode(text, u, cfg));
}

SclLossGradient scl_loss_gradient(std::span<const Embedding> embeddings, std::span<const std::string> labels,
                                  double tau) {
  require_labels(embeddings.size(), labels.size());
  if (!(tau > 0.0)) throw Error(ErrorKind::kInvalidArgument, "tau must be positive");
  const std::size_t n = embeddings.size();
  const std::size_t dim = embeddings.front().dim();
  for (const auto& z : embeddings) {
    if (z.dim() != dim) throw Error(ErrorKind::kDimensionMismatch, "embeddings differ in dimension");
  }

  std::vector<double> logits(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      logits[i * n + k] = logits[k * n + i] = kernels::dot(embeddings[i].values(), embeddings[k].values()) / tau;
    }
  }

  // coeff[i][k] = d loss / d logit_ik before the 1/N_valid factor.
  std::vector<double> coeff(n * n, 0.0);
  std::size_t valid = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t positives = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && labels[j] == labels[i]) ++positives;
    }
    if (positives == 0) continue;
    ++valid;

    double max_logit = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) max_logit = std::max(max_logit, logits[i * n + k]);
    }
    double sum_exp = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) sum_exp += std::exp(logits[i * n + k] - max_logit);
    }
    const double lse = max_logit + std::log(sum_exp);

    double positive_sum = 0.0;
    const double inv_pos = 1.0 / static_cast<double>(positives);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const bool positive = labels[k] == labels[i];
      if (positive) positive_sum += logits[i * n + k];
      coeff[i * n + k] = std::exp(logits[i * n + k] - lse) - (positive ? inv_pos : 0.0);
    }
    total += lse - positive_sum * inv_pos;
  }
  if (valid == 0) {
    throw Error(ErrorKind::kNoPositivePairs, "no response shares its label with another response");
  }

  SclLossGradient out;
  out.loss = total / static_cast<double>(valid);
  out.embedding_grads.assign(n, std::vector<double>(dim, 0.0));
  const double factor = 1.0 / (static_cast<double>(valid) * tau);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double c = coeff[i * n + k];
      if (c == 0.0) continue;
      kernels::axpy(c * factor, embeddings[k].values(), out.embedding_grads[i]);
      kernels::axpy(c * factor, embeddings[i].values(), out.embedding_grads[k]);
    }
  }
  return out;
}

double scl_loss(std::span<const Embedding> embeddings, std::span<const std::string> labels, double tau) {
  return scl_loss_gradient(embeddings, labels, tau).loss;
}

SclStep scl_loss_and_gradient(const LabeledGroup& group, const SuffixEmbeddings& u, const SclConfig& cfg) {
  require_shape(u, cfg);
  require_labels(group.responses.size(), group.labels.size());
  const std::size_t n = group.size();

  std::vector<Encoded> encoded;
  encoded.reserve(n);
  for (const auto& text : group.responses) encoded.push_back(encode(text, u, cfg));
  std::vector<Embedding> zs;
  zs.reserve(n);
  for (const auto& e : encoded) zs.push_back(e.z);

  const SclLossGradient head = scl_loss_gradient(zs, group.labels, cfg.tau);

  SclStep step{head.loss, SuffixEmbeddings(cfg.tokens, cfg.dim)};
  std::vector<double> pooled_grad(cfg.dim);
  const double inv_tokens = 1.0 / static_cast<double>(cfg.tokens);
  for (std::size_t i = 0; i < n; ++i) {
    const Encoded& e = encoded[i];
    const auto& g = head.embedding_grads[i];
    // Through z = h / |h|: (g - (g.z) z) / |h|.
    const double radial = kernels::dot(g, e.z.values());
    for (std::size_t k = 0; k < cfg.dim; ++k) pooled_grad[k] = (g[k] - radial * e.z[k]) / e.pooled_norm;
    for (std::size_t m = 0; m < cfg.tokens; ++m) {
      const auto hm = e.states.row(m);
      auto gm = step.gradient.row(m);
      for (std::size_t k = 0; k < cfg.dim; ++k) {
        gm[k] += inv_tokens * pooled_grad[k] * (1.0 - hm[k] * hm[k]) * e.features[k];
      }
    }
  }
  return step;
}

SuffixEmbeddings scl_gradient(const LabeledGroup& group, const SuffixEmbeddings& u, const SclConfig& cfg) {
  return scl_loss_and_gradient(group, u, cfg).gradient;
}

double scl_group_loss(const LabeledGroup& group, const SuffixEmbeddings& u, const SclConfig& cfg) {
  require_shape(u, cfg);
  require_labels(group.responses.size(), group.labels.size());
  std::vector<Embedding> zs;
  zs.reserve(group.size());
  for (const auto& text : group.responses) zs.push_back(toy_embed(text, u, cfg));
  return scl_loss(zs, group.labels, cfg.tau);
}

TrainResult train_summary_embeddings(std::span<const LabeledGroup> dataset, const SclConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorKind::kInvalidArgument, "training dataset is empty");
  TrainResult result{SuffixEmbeddings::seeded(cfg), {}};
  result.loss_history.reserve(cfg.steps + 1);
  const double groups = static_cast<double>(dataset.size());

  for (std::size_t epoch = 0; epoch < cfg.steps; ++epoch) {
    double epoch_loss = 0.0;
    for (const auto& group : dataset) {
      SclStep step = scl_loss_and_gradient(group, result.u, cfg);
      epoch_loss += step.loss;
      kernels::axpy(-cfg.learning_rate, step.gradient.values(), result.u.values());
    }
    result.loss_history.push_back(epoch_loss / groups);
  }

  double final_loss = 0.0;
  for (const auto& group : dataset) final_loss += scl_group_loss(group, result.u, cfg);
  result.loss_history.push_back(final_loss / groups);
  return result;
}

LabeledGroup filter_singletons(const LabeledGroup& group) {
  if (group.responses.size() != group.labels.size()) {
    throw Error(ErrorKind::kLengthMismatch, "responses and labels differ in length");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& label : group.labels) ++counts[label];
  LabeledGroup out;
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (counts[group.labels[i]] > 1) {
      out.responses.push_back(group.responses[i]);
      out.labels.push_back(group.labels[i]);
    }
  }
  return out;
}

std::optional<LabeledGroup> cap_majority(const LabeledGroup& group, CapMode mode, std::uint64_t seed) {
  if (group.responses.size() != group.labels.size()) {
    throw Error(ErrorKind::kLengthMismatch, "responses and labels differ in length");
  }
  if (group.size() == 0) throw Error(ErrorKind::kInvalidArgument, "cannot cap an empty group");
  std::map<std::string, std::size_t> counts;
  for (const auto& label : group.labels) ++counts[label];
  const std::size_t n = group.size();
  const auto over = std::find_if(counts.begin(), counts.end(), [&](const auto& kv) { return 2 * kv.second > n; });
  if (over == counts.end()) return group;
  if (mode == CapMode::kDropGroup) return std::nullopt;

  // Keep as many of the dominant label as there are other responses.
  const std::string& dominant = over->first;
  const std::size_t keep = n - over->second;
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (group.labels[i] == dominant) members.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(members.begin(), members.end(), rng);
  std::vector<bool> drop(n, false);
  for (std::size_t k = keep; k < members.size(); ++k) drop[members[k]] = true;

  LabeledGroup out;
  for (std::size_t i = 0; i < n; ++i) {
    if (drop[i]) continue;
    out.responses.push_back(group.responses[i]);
    out.labels.push_back(group.labels[i]);
  }
  return out;
}

void write_suffix(std::ostream& out, const SuffixEmbeddings& u, std::uint64_t seed) {
  out << "sclsuffix v1 " << u.tokens() << ' ' << u.dim() << ' ' << seed << '\n';
  for (std::size_t m = 0; m < u.tokens(); ++m) {
    const auto row = u.row(m);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out << ' ';
      out << format_double(row[k]);
    }
    out << '\n';
  }
}

SuffixFile read_suffix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorKind::kParseError, "suffix file: missing header");
  std::istringstream hs(header);
  std::string magic, version;
  std::size_t tokens = 0, dim = 0;
  std::uint64_t seed = 0;
  if (!(hs >> magic >> version >> tokens >> dim >> seed) || magic != "sclsuffix") {
    throw Error(ErrorKind::kParseError, "suffix file: malformed header '" + header + "'");
  }
  if (version != "v1") throw Error(ErrorKind::kParseError, "suffix file: unsupported version " + version);
  if (tokens < 1 || dim < 2) throw Error(ErrorKind::kSchemaError, "suffix file: invalid shape");

  SuffixFile file{SuffixEmbeddings(tokens, dim), seed};
  std::string line;
  for (std::size_t m = 0; m < tokens; ++m) {
    if (!std::getline(in, line)) {
      throw Error(ErrorKind::kParseError, "suffix file: expected " + std::to_string(tokens) + " rows");
    }
    auto row = file.u.row(m);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t k = 0; k < dim; ++k) {
      while (p < end && *p == ' ') ++p;
      const auto res = std::from_chars(p, end, row[k]);
      if (res.ec != std::errc() || !std::isfinite(row[k])) {
        throw Error(ErrorKind::kParseError, "suffix file: bad value in row " + std::to_string(m + 2));
      }
      p = res.ptr;
    }
    while (p < end && (*p == ' ' || *p == '\r')) ++p;
    if (p != end) throw Error(ErrorKind::kParseError, "suffix file: extra values in row " + std::to_string(m + 2));
  }
  return file;
}

void save_suffix(const std::string& path, const SuffixEmbeddings& u, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path + " for writing");
  write_suffix(out, u, seed);
  if (!out) throw Error(ErrorKind::kIoError, "failed writing " + path);
}

SuffixFile load_suffix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  return read_suffix(in);
}

}  // namespace consensus
