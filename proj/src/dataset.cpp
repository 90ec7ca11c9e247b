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

#include "consensus/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "consensus/error.hpp"

namespace consensus {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string where(std::size_t line, const std::string& path) {
  return "line " + std::to_string(line) + ": " + path;
}

std::vector<double> read_embedding(const json& value, std::size_t line, const std::string& path) {
  if (!value.is_array()) throw Error(ErrorKind::kSchemaError, where(line, path) + " must be an array or null");
  std::vector<double> out;
  out.reserve(value.size());
  for (std::size_t k = 0; k < value.size(); ++k) {
    if (!value[k].is_number()) {
      throw Error(ErrorKind::kSchemaError, where(line, path + "[" + std::to_string(k) + "]") + " is not a number");
    }
    out.push_back(value[k].get<double>());
  }
  if (out.empty()) throw Error(ErrorKind::kSchemaError, where(line, path) + " is empty");
  double squares = 0.0;
  for (double v : out) squares += v * v;
  const double norm = std::sqrt(squares);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kLoadNormTolerance) {
    throw Error(ErrorKind::kEmbeddingNormError,
                where(line, path) + " has norm " + std::to_string(norm) + ", expected 1 within 1e-6");
  }
  if (norm != 1.0) {
    for (double& v : out) v /= norm;
  }
  return out;
}

std::optional<std::string> read_optional_string(const json& object, const char* key, std::size_t line,
                                                 const std::string& path) {
  const auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorKind::kSchemaError, where(line, path + "." + key) + " must be a string");
  return it->get<std::string>();
}

CandidateSet parse_line(const std::string& text, std::size_t line) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorKind::kParseError, "line " + std::to_string(line) + ": invalid JSON");
  if (!doc.is_object()) throw Error(ErrorKind::kSchemaError, where(line, "$") + " must be an object");

  CandidateSet set;
  const auto qid = doc.find("question_id");
  if (qid == doc.end() || !qid->is_string() || qid->get<std::string>().empty()) {
    throw Error(ErrorKind::kSchemaError, where(line, "question_id") + " must be a non-empty string");
  }
  set.question_id = qid->get<std::string>();

  const auto responses = doc.find("responses");
  if (responses == doc.end() || !responses->is_array() || responses->empty()) {
    throw Error(ErrorKind::kSchemaError, where(line, "responses") + " must be a non-empty array");
  }
  std::optional<std::size_t> dim;
  for (std::size_t i = 0; i < responses->size(); ++i) {
    const std::string path = "responses[" + std::to_string(i) + "]";
    const json& r = (*responses)[i];
    if (!r.is_object()) throw Error(ErrorKind::kSchemaError, where(line, path) + " must be an object");
    Candidate c;
    const auto text_it = r.find("text");
    if (text_it == r.end() || !text_it->is_string()) {
      throw Error(ErrorKind::kSchemaError, where(line, path + ".text") + " must be a string");
    }
    c.text = text_it->get<std::string>();
    const auto emb = r.find("embedding");
    if (emb != r.end() && !emb->is_null()) {
      c.embedding = read_embedding(*emb, line, path + ".embedding");
      if (dim && *dim != c.embedding->size()) {
        throw Error(ErrorKind::kSchemaError, where(line, path + ".embedding") + " has dimension " +
                                                 std::to_string(c.embedding->size()) + ", expected " +
                                                 std::to_string(*dim));
      }
      dim = c.embedding->size();
    }
    c.gold_answer = read_optional_string(r, "gold_answer", line, path);
    set.responses.push_back(std::move(c));
  }
  return set;
}

}  // namespace

std::optional<std::string> CandidateSet::gold_answer() const {
  for (const auto& r : responses) {
    if (r.gold_answer) return r.gold_answer;
  }
  return std::nullopt;
}

std::vector<std::string> CandidateSet::texts() const {
  std::vector<std::string> out;
  out.reserve(responses.size());
  for (const auto& r : responses) out.push_back(r.text);
  return out;
}

std::vector<CandidateSet> parse_candidate_sets(std::istream& in) {
  std::vector<CandidateSet> sets;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    sets.push_back(parse_line(text, line));
  }
  return sets;
}

std::vector<CandidateSet> load_candidate_sets(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  return parse_candidate_sets(in);
}

void write_candidate_sets(std::ostream& out, std::span<const CandidateSet> sets) {
  for (const auto& set : sets) {
    ordered_json doc;
    doc["question_id"] = set.question_id;
    doc["responses"] = ordered_json::array();
    for (const auto& r : set.responses) {
      ordered_json item;
      item["text"] = r.text;
      item["embedding"] = r.embedding ? ordered_json(*r.embedding) : ordered_json(nullptr);
      item["gold_answer"] = r.gold_answer ? ordered_json(*r.gold_answer) : ordered_json(nullptr);
      doc["responses"].push_back(std::move(item));
    }
    out << doc.dump(-1, ' ', false, ordered_json::error_handler_t::replace) << '\n';
  }
}

void save_candidate_sets(const std::string& path, std::span<const CandidateSet> sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path + " for writing");
  write_candidate_sets(out, sets);
  if (!out) throw Error(ErrorKind::kIoError, "failed writing " + path);
}

}  // namespace consensus
