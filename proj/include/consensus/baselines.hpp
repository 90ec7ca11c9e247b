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

// Exact-match self-consistency voting and unigram-overlap consensus scoring.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "consensus/selection.hpp"

namespace consensus {

struct ExtractedAnswer {
  std::string raw;
  std::string normalized;

  friend bool operator==(const ExtractedAnswer&, const ExtractedAnswer&) = default;
};

// Trims and collapses internal whitespace runs to one space. Case is kept.
std::string normalize_answer(std::string_view text);

// Content of the last \boxed{...} in `text`, matched by brace depth. Escaped
// braces (\{ and \}) do not change the depth. Returns nullopt when there is no
// box or the last box is unbalanced.
std::optional<ExtractedAnswer> extract_answer(std::string_view text);

struct VoteTally {
  // Normalized answer -> count, in order of first occurrence.
  std::vector<std::pair<std::string, std::size_t>> counts;
  std::size_t total = 0;

  // Index into `counts` of the modal answer (earliest first occurrence on ties).
  // Requires at least one counted answer.
  std::size_t modal() const;
};

VoteTally tally_votes(std::span<const std::optional<ExtractedAnswer>> answers);

// Majority vote. Throws NoExtractableAnswers when nothing was extracted.
SelectionResult sc_vote(std::span<const std::optional<ExtractedAnswer>> answers,
                        const SelectionConfig& cfg = {});

// Lowercased unigrams split on Unicode whitespace and punctuation. Only ASCII
// letters are case-folded.
std::vector<std::string> tokenize_unigrams(std::string_view text);

using TermFrequencies = std::map<std::string, double, std::less<>>;

// Relative term frequencies (counts / token total); empty for empty text.
TermFrequencies term_frequencies(std::string_view text);

// sum_t min(f_a, f_b) / sum_t max(f_a, f_b); 0 when either side is empty.
double weighted_jaccard(const TermFrequencies& a, const TermFrequencies& b);

// Mean pairwise weighted Jaccard per response.
SelectionResult wucs_scores(std::span<const std::string> texts, const SelectionConfig& cfg = {});

}  // namespace consensus
