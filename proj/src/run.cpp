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

#include "consensus/run.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "consensus/baselines.hpp"
#include "consensus/error.hpp"
#include "consensus/format.hpp"

namespace consensus {
namespace {

using nlohmann::json;

std::vector<std::optional<ExtractedAnswer>> extract_all(const CandidateSet& set) {
  std::vector<std::optional<ExtractedAnswer>> answers;
  answers.reserve(set.responses.size());
  for (const auto& r : set.responses) answers.push_back(extract_answer(r.text));
  return answers;
}

std::vector<Embedding> require_embeddings(const CandidateSet& set) {
  std::vector<Embedding> out;
  out.reserve(set.responses.size());
  for (std::size_t i = 0; i < set.responses.size(); ++i) {
    const auto& emb = set.responses[i].embedding;
    if (!emb) {
      throw Error(ErrorKind::kMissingEmbeddings,
                  "question '" + set.question_id + "': response " + std::to_string(i) + " has no embedding");
    }
    out.push_back(Embedding::normalized(*emb));
  }
  return out;
}

SelectionResult select_random(std::size_t n, std::uint64_t seed, std::size_t question) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(question), static_cast<std::uint32_t>(question >> 32)};
  std::mt19937_64 rng(seq);
  SelectionResult result;
  result.method = Method::kRandom;
  result.winner_index = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  result.scores.assign(n, 1.0 / static_cast<double>(n));
  result.confidence = 1.0 / static_cast<double>(n);
  return result;
}

QuestionResult grade(const CandidateSet& set, SelectionResult selection) {
  QuestionResult q;
  q.question_id = set.question_id;
  const auto answers = extract_all(set);
  const std::size_t winner = selection.winner_index;
  if (answers[winner]) q.winner_answer = answers[winner]->normalized;
  if (const auto gold = set.gold_answer()) {
    q.correct = q.winner_answer && *q.winner_answer == normalize_gold(*gold);
  }
  if (std::any_of(answers.begin(), answers.end(), [](const auto& a) { return a.has_value(); })) {
    const auto members = majority_set(answers);
    q.consistent = std::find(members.begin(), members.end(), winner) != members.end();
  }
  q.selection = std::move(selection);
  return q;
}

RunSummary summarize(std::span<const QuestionResult> results, std::size_t ece_bins) {
  RunSummary summary;
  summary.questions = results.size();
  std::vector<double> confidences;
  std::vector<bool> correct;
  std::size_t hits = 0, consistent = 0;
  for (const auto& q : results) {
    if (q.correct) {
      confidences.push_back(q.selection.confidence);
      correct.push_back(*q.correct);
      hits += *q.correct ? 1 : 0;
    }
    if (q.consistent) {
      ++summary.consistency_count;
      consistent += *q.consistent ? 1 : 0;
    }
  }
  summary.graded = correct.size();
  if (summary.graded > 0) summary.accuracy = static_cast<double>(hits) / static_cast<double>(summary.graded);
  if (summary.consistency_count > 0) {
    summary.consistency = static_cast<double>(consistent) / static_cast<double>(summary.consistency_count);
  }
  summary.calibration = ece(confidences, correct, ece_bins);
  return summary;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string json_string(const std::string& s) {
  return json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string optional_bool(const std::optional<bool>& v) {
  if (!v) return "";
  return *v ? "true" : "false";
}

std::string json_optional_bool(const std::optional<bool>& v) {
  if (!v) return "null";
  return *v ? "true" : "false";
}

std::size_t parse_index(const std::string& text, std::size_t line) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) {
    throw Error(ErrorKind::kParseError, "line " + std::to_string(line) + ": bad winner_index '" + text + "'");
  }
  return static_cast<std::size_t>(value);
}

double parse_real(const std::string& text, std::size_t line) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) {
    throw Error(ErrorKind::kParseError, "line " + std::to_string(line) + ": bad confidence '" + text + "'");
  }
  return value;
}

}  // namespace

void RunConfig::validate() const {
  if (!(tau_prime > 0.0)) throw Error(ErrorKind::kInvalidArgument, "tau_prime must be positive");
  if (ece_bins < 1) throw Error(ErrorKind::kInvalidArgument, "ece_bins must be at least 1");
  if (method == Method::kUsc) {
    if (!judge) throw Error(ErrorKind::kInvalidArgument, "method usc needs a judge endpoint");
    judge->validate();
  }
}

std::string normalize_gold(const std::string& gold) {
  if (auto boxed = extract_answer(gold)) return boxed->normalized;
  return normalize_answer(gold);
}

void apply_toy_encoder(std::vector<CandidateSet>& sets, const SuffixFile& suffix) {
  SclConfig cfg;
  cfg.tokens = suffix.u.tokens();
  cfg.dim = suffix.u.dim();
  cfg.seed = suffix.seed;
  for (auto& set : sets) {
    for (auto& r : set.responses) {
      const Embedding z = toy_embed(r.text, suffix.u, cfg);
      r.embedding = std::vector<double>(z.values().begin(), z.values().end());
    }
  }
}

RunOutput run_selection(std::span<const CandidateSet> sets, const RunConfig& cfg, JudgeTransport* transport,
                        const Sleeper& sleeper) {
  cfg.validate();
  if (cfg.method == Method::kUsc && transport == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "method usc needs a transport");
  }
  SelectionConfig selection;
  selection.tau_prime = cfg.tau_prime;

  RunOutput output;
  output.results.reserve(sets.size());
  for (std::size_t q = 0; q < sets.size(); ++q) {
    const CandidateSet& set = sets[q];
    const std::size_t n = set.responses.size();
    SelectionResult result;
    switch (cfg.method) {
      case Method::kLsc:
      case Method::kLscTopK:
      case Method::kLscMean: {
        const auto embeddings = require_embeddings(set);
        if (n < 2) {
          throw Error(ErrorKind::kTooFewCandidates, "question '" + set.question_id + "' has a single response");
        }
        const SimilarityMatrix sim = cosine_similarity_matrix(embeddings);
        if (cfg.method == Method::kLsc) result = select_exp_weighted(sim, selection);
        if (cfg.method == Method::kLscTopK) result = select_dynamic_topk(sim, selection);
        if (cfg.method == Method::kLscMean) result = select_arithmetic_mean(sim, selection);
        break;
      }
      case Method::kSc: {
        const auto answers = extract_all(set);
        try {
          result = sc_vote(answers, selection);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kNoExtractableAnswers) throw;
          throw Error(ErrorKind::kNoExtractableAnswers, "question '" + set.question_id + "': " + e.what());
        }
        break;
      }
      case Method::kWucs:
        result = wucs_scores(set.texts(), selection);
        break;
      case Method::kUsc:
        result = usc_select(set.texts(), *cfg.judge, *transport, sleeper);
        break;
      case Method::kRandom:
        result = select_random(n, cfg.seed, q);
        break;
    }
    output.results.push_back(grade(set, std::move(result)));
  }
  output.summary = summarize(output.results, cfg.ece_bins);
  return output;
}

void write_report(std::ostream& out, std::span<const QuestionResult> results, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    out << "question_id,method,winner_index,k_star,confidence,winner_answer,correct,consistent\n";
    for (const auto& q : results) {
      const auto& s = q.selection;
      out << csv_field(q.question_id) << ',' << to_string(s.method) << ',' << s.winner_index << ','
          << (s.k_star ? std::to_string(*s.k_star) : "") << ',' << format_float(s.confidence) << ','
          << csv_field(q.winner_answer.value_or("")) << ',' << optional_bool(q.correct) << ','
          << optional_bool(q.consistent) << '\n';
    }
    return;
  }
  for (const auto& q : results) {
    const auto& s = q.selection;
    out << "{\"question_id\":" << json_string(q.question_id) << ",\"method\":\"" << to_string(s.method)
        << "\",\"winner_index\":" << s.winner_index
        << ",\"k_star\":" << (s.k_star ? std::to_string(*s.k_star) : "null")
        << ",\"confidence\":" << format_float(s.confidence)
        << ",\"winner_answer\":" << (q.winner_answer ? json_string(*q.winner_answer) : "null")
        << ",\"correct\":" << json_optional_bool(q.correct) << ",\"consistent\":" << json_optional_bool(q.consistent)
        << ",\"scores\":[";
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
      if (i > 0) out << ',';
      out << format_float(s.scores[i]);
    }
    out << "]}\n";
  }
}

void write_report(const std::string& path, std::span<const QuestionResult> results, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path + " for writing");
  write_report(out, results, format);
  if (!out) throw Error(ErrorKind::kIoError, "failed writing " + path);
}

std::vector<Prediction> parse_predictions(std::istream& in) {
  std::vector<Prediction> predictions;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> columns;
  bool csv = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line_no == 1 && line[first] != '{') {
      csv = true;
      const auto header = split_csv_line(line);
      for (std::size_t c = 0; c < header.size(); ++c) columns[header[c]] = c;
      for (const char* required : {"question_id", "winner_index", "confidence"}) {
        if (!columns.count(required)) {
          throw Error(ErrorKind::kSchemaError, std::string("predictions header lacks column ") + required);
        }
      }
      continue;
    }
    Prediction p;
    if (csv) {
      const auto fields = split_csv_line(line);
      if (fields.size() < columns.size()) {
        throw Error(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": too few columns");
      }
      p.question_id = fields[columns["question_id"]];
      p.winner_index = parse_index(fields[columns["winner_index"]], line_no);
      p.confidence = parse_real(fields[columns["confidence"]], line_no);
    } else {
      const json doc = json::parse(line, nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": invalid JSON record");
      }
      if (!doc.contains("question_id") || !doc["question_id"].is_string() || !doc.contains("winner_index") ||
          !doc["winner_index"].is_number_unsigned() || !doc.contains("confidence") ||
          !doc["confidence"].is_number()) {
        throw Error(ErrorKind::kSchemaError,
                    "line " + std::to_string(line_no) + ": record needs question_id, winner_index, confidence");
      }
      p.question_id = doc["question_id"].get<std::string>();
      p.winner_index = doc["winner_index"].get<std::size_t>();
      p.confidence = doc["confidence"].get<double>();
    }
    predictions.push_back(std::move(p));
  }
  return predictions;
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  return parse_predictions(in);
}

RunSummary evaluate_predictions(std::span<const CandidateSet> sets, std::span<const Prediction> predictions,
                                std::size_t ece_bins) {
  std::map<std::string, const CandidateSet*> by_id;
  for (const auto& set : sets) by_id[set.question_id] = &set;
  std::vector<QuestionResult> results;
  results.reserve(predictions.size());
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.question_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::kSchemaError, "prediction for unknown question '" + p.question_id + "'");
    }
    if (p.winner_index >= it->second->responses.size()) {
      throw Error(ErrorKind::kSchemaError, "question '" + p.question_id + "': winner_index " +
                                               std::to_string(p.winner_index) + " out of range");
    }
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
      throw Error(ErrorKind::kSchemaError, "question '" + p.question_id + "': confidence outside [0, 1]");
    }
    SelectionResult selection;
    selection.winner_index = p.winner_index;
    selection.confidence = p.confidence;
    results.push_back(grade(*it->second, std::move(selection)));
  }
  return summarize(results, ece_bins);
}

void write_summary_json(std::ostream& out, const RunSummary& summary) {
  auto optional_real = [](const std::optional<double>& v) { return v ? format_float(*v) : std::string("null"); };
  out << "{\"questions\":" << summary.questions << ",\"graded\":" << summary.graded
      << ",\"accuracy\":" << optional_real(summary.accuracy) << ",\"consistency\":"
      << optional_real(summary.consistency) << ",\"ece\":" << format_float(summary.calibration.ece) << ",\"bins\":[";
  for (std::size_t b = 0; b < summary.calibration.bins.size(); ++b) {
    const auto& bin = summary.calibration.bins[b];
    if (b > 0) out << ',';
    out << "{\"lower\":" << format_float(bin.lower) << ",\"upper\":" << format_float(bin.upper)
        << ",\"count\":" << bin.count << ",\"mean_confidence\":" << format_float(bin.mean_confidence)
        << ",\"accuracy\":" << format_float(bin.empirical_accuracy) << '}';
  }
  out << "]}\n";
}

}  // namespace consensus
