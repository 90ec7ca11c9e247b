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

// Per-question selection over candidate sets, the summary metrics, and the
// report formats shared by the select and eval commands.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "consensus/dataset.hpp"
#include "consensus/metrics.hpp"
#include "consensus/scl.hpp"
#include "consensus/selection.hpp"
#include "consensus/usc.hpp"

namespace consensus {

struct RunConfig {
  Method method = Method::kLsc;
  double tau_prime = 0.5;
  std::uint64_t seed = 0;
  std::size_t ece_bins = 10;
  // Required for Method::kUsc.
  std::optional<JudgeEndpointConfig> judge;

  void validate() const;
};

struct QuestionResult {
  std::string question_id;
  SelectionResult selection;
  std::optional<std::string> winner_answer;
  // Winner's extracted answer equals the gold answer; unset without gold.
  std::optional<bool> correct;
  // Winner lies in the exact-match majority set; unset when no answer extracts.
  std::optional<bool> consistent;
};

struct RunSummary {
  std::size_t questions = 0;
  std::size_t graded = 0;
  std::optional<double> accuracy;
  std::size_t consistency_count = 0;
  std::optional<double> consistency;
  // Over graded questions only.
  CalibrationReport calibration;
};

struct RunOutput {
  std::vector<QuestionResult> results;
  RunSummary summary;
};

// Gold answer as compared against extracted answers: the content of its
// \boxed{} when it has one, else the whitespace-normalized string.
std::string normalize_gold(const std::string& gold);

// Replaces every embedding with the toy encoder's summary embedding.
void apply_toy_encoder(std::vector<CandidateSet>& sets, const SuffixFile& suffix);

// Results follow input order. Throws MissingEmbeddings, NoExtractableAnswers
// and the selected method's errors. `transport` is used only by Method::kUsc.
RunOutput run_selection(std::span<const CandidateSet> sets, const RunConfig& cfg,
                        JudgeTransport* transport = nullptr, const Sleeper& sleeper = {});

enum class ReportFormat { kCsv, kJsonl };

// CSV columns: question_id,method,winner_index,k_star,confidence,winner_answer,correct,consistent.
// JSONL records carry the same fields plus "scores". Floats use 6 significant digits.
void write_report(std::ostream& out, std::span<const QuestionResult> results, ReportFormat format);
void write_report(const std::string& path, std::span<const QuestionResult> results, ReportFormat format);

struct Prediction {
  std::string question_id;
  std::size_t winner_index = 0;
  double confidence = 0.0;
};

// Reads a report produced by write_report (CSV or JSONL, detected from content).
std::vector<Prediction> parse_predictions(std::istream& in);
std::vector<Prediction> load_predictions(const std::string& path);

// Grades predictions against the candidate sets they were made on.
RunSummary evaluate_predictions(std::span<const CandidateSet> sets, std::span<const Prediction> predictions,
                                std::size_t ece_bins);

// {"questions":..,"graded":..,"accuracy":..,"consistency":..,"ece":..,"bins":[..]}
void write_summary_json(std::ostream& out, const RunSummary& summary);

}  // namespace consensus
