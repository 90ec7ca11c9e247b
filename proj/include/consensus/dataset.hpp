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

// Candidate sets on disk: JSON Lines, one question per line.
//
//   {"question_id": "q1",
//    "responses": [{"text": "...", "embedding": [..] | null, "gold_answer": "..." | null}]}

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace consensus {

// Embeddings within this distance of unit norm are renormalized on load;
// anything further is rejected.
inline constexpr double kLoadNormTolerance = 1e-6;

struct Candidate {
  std::string text;
  std::optional<std::vector<double>> embedding;
  std::optional<std::string> gold_answer;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct CandidateSet {
  std::string question_id;
  std::vector<Candidate> responses;

  // First non-null gold_answer among the responses.
  std::optional<std::string> gold_answer() const;
  std::vector<std::string> texts() const;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

// Throws ParseError (with line number), SchemaError (with field path) or
// EmbeddingNormError.
std::vector<CandidateSet> parse_candidate_sets(std::istream& in);
std::vector<CandidateSet> load_candidate_sets(const std::string& path);

void write_candidate_sets(std::ostream& out, std::span<const CandidateSet> sets);
void save_candidate_sets(const std::string& path, std::span<const CandidateSet> sets);

}  // namespace consensus
