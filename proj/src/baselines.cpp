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

#include "consensus/baselines.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "consensus/error.hpp"

namespace consensus {
namespace {

constexpr std::string_view kBoxOpen = "\\boxed{";

bool is_space_byte(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Decodes one UTF-8 code point starting at text[pos]; advances pos. Malformed
// sequences decode as U+FFFD and consume one byte.
char32_t next_code_point(std::string_view text, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + len > text.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto cont = static_cast<unsigned char>(text[pos + k]);
    if ((cont & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  pos += len;
  return cp;
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_unicode_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) ||
           (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x3003) ||
         (cp >= 0x3008 && cp <= 0x3011) || (cp >= 0x3014 && cp <= 0x301F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
         (cp >= 0xFF1A && cp <= 0xFF20);
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space_byte(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::optional<ExtractedAnswer> extract_answer(std::string_view text) {
  const std::size_t open = text.rfind(kBoxOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const std::size_t begin = open + kBoxOpen.size();
  int depth = 1;
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\\' && i + 1 < text.size() && (text[i + 1] == '{' || text[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      ExtractedAnswer answer;
      answer.raw = std::string(text.substr(begin, i - begin));
      answer.normalized = normalize_answer(answer.raw);
      return answer;
    }
  }
  return std::nullopt;
}

std::size_t VoteTally::modal() const {
  if (counts.empty()) throw Error(ErrorKind::kNoExtractableAnswers, "no answers were counted");
  std::size_t best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k].second > counts[best].second) best = k;
  }
  return best;
}

VoteTally tally_votes(std::span<const std::optional<ExtractedAnswer>> answers) {
  VoteTally tally;
  tally.total = answers.size();
  for (const auto& answer : answers) {
    if (!answer) continue;
    auto it = std::find_if(tally.counts.begin(), tally.counts.end(),
                           [&](const auto& entry) { return entry.first == answer->normalized; });
    if (it == tally.counts.end()) {
      tally.counts.emplace_back(answer->normalized, 1);
    } else {
      ++it->second;
    }
  }
  return tally;
}

SelectionResult sc_vote(std::span<const std::optional<ExtractedAnswer>> answers, const SelectionConfig& /*cfg*/) {
  const VoteTally tally = tally_votes(answers);
  if (tally.counts.empty()) {
    throw Error(ErrorKind::kNoExtractableAnswers, "none of the " + std::to_string(answers.size()) +
                                                      " responses has an extractable answer");
  }
  const std::string& mode = tally.counts[tally.modal()].first;
  const double total = static_cast<double>(tally.total);

  SelectionResult result;
  result.method = Method::kSc;
  result.scores.assign(answers.size(), 0.0);
  bool found = false;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i]) continue;
    const auto it = std::find_if(tally.counts.begin(), tally.counts.end(),
                                 [&](const auto& entry) { return entry.first == answers[i]->normalized; });
    result.scores[i] = static_cast<double>(it->second) / total;
    if (!found && answers[i]->normalized == mode) {
      result.winner_index = i;
      found = true;
    }
  }
  result.confidence = result.scores[result.winner_index];
  return result;
}

std::vector<std::string> tokenize_unigrams(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_code_point(text, pos);
    if (is_unicode_space(cp) || is_unicode_punct(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (cp >= 'A' && cp <= 'Z') {
      current.push_back(static_cast<char>(cp - 'A' + 'a'));
    } else {
      current.append(text.substr(start, pos - start));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

TermFrequencies term_frequencies(std::string_view text) {
  TermFrequencies freqs;
  const auto tokens = tokenize_unigrams(text);
  for (const auto& token : tokens) freqs[token] += 1.0;
  for (auto& [token, value] : freqs) value /= static_cast<double>(tokens.size());
  return freqs;
}

double weighted_jaccard(const TermFrequencies& a, const TermFrequencies& b) {
  if (a.empty() || b.empty()) return 0.0;
  double num = 0.0;
  double den = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  // Merge walk over the sorted union of terms.
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      den += ia->second;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      den += ib->second;
      ++ib;
    } else {
      num += std::min(ia->second, ib->second);
      den += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

SelectionResult wucs_scores(std::span<const std::string> texts, const SelectionConfig& cfg) {
  const std::size_t n = texts.size();
  if (n < 2) throw Error(ErrorKind::kTooFewCandidates, "WUCS needs at least 2 responses");
  std::vector<TermFrequencies> freqs;
  freqs.reserve(n);
  for (const auto& text : texts) freqs.push_back(term_frequencies(text));

  std::vector<double> pair(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      pair[i * n + j] = pair[j * n + i] = weighted_jaccard(freqs[i], freqs[j]);
    }
  }
  SelectionResult result;
  result.method = Method::kWucs;
  result.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum += pair[i * n + j];
    }
    result.scores[i] = sum / static_cast<double>(n - 1);
  }
  result.winner_index = argmax(result.scores, cfg.tie_break);
  result.confidence = std::clamp(result.scores[result.winner_index], 0.0, 1.0);
  return result;
}

}  // namespace consensus
