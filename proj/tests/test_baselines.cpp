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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "consensus/baselines.hpp"
#include "consensus/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace consensus;
using support::kind_of;

namespace {

std::optional<ExtractedAnswer> ans(const std::string& s) { return ExtractedAnswer{s, normalize_answer(s)}; }

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

TEST_CASE("normalize_answer") {
  CHECK(normalize_answer("  72 ") == "72");
  CHECK(normalize_answer("a \t\n b") == "a b");
  CHECK(normalize_answer("C") == "C");
  CHECK(normalize_answer("   ") == "");
}

TEST_CASE("extract_answer examples") {
  CHECK(extract_answer("The answer is \\boxed{72}.")->normalized == "72");
  CHECK(extract_answer("\\boxed{\\frac{1}{2}}")->normalized == "\\frac{1}{2}");
  CHECK_FALSE(extract_answer("no box here").has_value());
  CHECK(extract_answer("first \\boxed{1} then \\boxed{ 2  3 }")->normalized == "2 3");
  CHECK(extract_answer("first \\boxed{1} then \\boxed{ 2  3 }")->raw == " 2  3 ");
  CHECK(extract_answer("\\boxed{\\{x\\}}")->normalized == "\\{x\\}");
  CHECK_FALSE(extract_answer("\\boxed{1} and \\boxed{2").has_value());
}

TEST_CASE("extract_answer never truncates an unbalanced box") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "ab{}\\ 1";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::string body;
    for (int k = 0; k < 8; ++k) body += alphabet[pick(rng)];
    const auto got = extract_answer("\\boxed{" + body + "}");
    // Depth oracle: scan body honouring escapes.
    int depth = 1;
    std::optional<std::size_t> close;
    for (std::size_t i = 0; i < body.size() + 1 && !close; ++i) {
      const char c = i < body.size() ? body[i] : '}';
      if (c == '\\' && i + 1 < body.size() + 1) {
        const char next = i + 1 < body.size() ? body[i + 1] : '}';
        if (next == '{' || next == '}') {
          ++i;
          continue;
        }
      }
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) close = i;
    }
    if (close) {
      REQUIRE(got.has_value());
      CHECK(got->raw == body.substr(0, *close));
    } else {
      CHECK_FALSE(got.has_value());
    }
    if (close && *close == body.size()) {
      // Balanced body: an extra unclosed brace must make the box unbalanced.
      CHECK_FALSE(extract_answer("\\boxed{" + body + "{").has_value());
    }
  }
  CHECK_FALSE(extract_answer("\\boxed{ab{").has_value());
}

TEST_CASE("sc_vote examples") {
  SUBCASE("unique mode") {
    const std::vector answers{ans("72"), ans("72"), ans("24")};
    const auto r = sc_vote(answers);
    CHECK(r.winner_index == 0);
    CHECK(r.confidence == doctest::Approx(2.0 / 3.0));
    CHECK(r.scores[2] == doctest::Approx(1.0 / 3.0));
    CHECK(r.method == Method::kSc);
  }
  SUBCASE("tie goes to first occurrence") {
    const std::vector answers{ans("a"), ans("b")};
    const auto r = sc_vote(answers);
    CHECK(r.winner_index == 0);
    CHECK(r.confidence == 0.5);
  }
  SUBCASE("unextractable answers are excluded") {
    const std::vector answers{std::optional<ExtractedAnswer>{}, ans("5"), ans("5")};
    const auto r = sc_vote(answers);
    CHECK(r.winner_index == 1);
    CHECK(r.confidence == doctest::Approx(2.0 / 3.0));
    CHECK(r.scores[0] == 0.0);
  }
  SUBCASE("normalization merges whitespace variants, not case") {
    const std::vector answers{ans("c"), ans("C "), ans(" C")};
    const auto r = sc_vote(answers);
    CHECK(r.winner_index == 1);
  }
  SUBCASE("nothing extractable") {
    const std::vector<std::optional<ExtractedAnswer>> answers(3);
    CHECK(kind_of([&] { sc_vote(answers); }) == ErrorKind::kNoExtractableAnswers);
  }
}

TEST_CASE("sc_vote winner carries the maximal recount") {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> symbol(0, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 12;
    std::vector<std::optional<ExtractedAnswer>> answers;
    for (std::size_t i = 0; i < n; ++i) {
      const int s = symbol(rng);
      answers.push_back(s == 4 ? std::nullopt : ans(std::string(1, static_cast<char>('a' + s))));
    }
    if (std::none_of(answers.begin(), answers.end(), [](const auto& a) { return a.has_value(); })) continue;
    std::map<std::string, int> recount;
    for (const auto& a : answers)
      if (a) ++recount[a->normalized];
    int best = 0;
    for (const auto& [k, v] : recount) best = std::max(best, v);
    const auto r = sc_vote(answers);
    REQUIRE(answers[r.winner_index].has_value());
    CHECK(recount[answers[r.winner_index]->normalized] == best);
    for (std::size_t i = 0; i < r.winner_index; ++i)
      if (answers[i]) CHECK(recount[answers[i]->normalized] < best);
  }
}

TEST_CASE("tokenize_unigrams") {
  CHECK(tokenize_unigrams("Hello, World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize_unigrams("x=1;y z") == std::vector<std::string>{"x", "1", "y", "z"});
  CHECK(tokenize_unigrams("Été — café") == std::vector<std::string>{"Été", "café"});
  CHECK(tokenize_unigrams("").empty());
  CHECK(tokenize_unigrams(" ,. ").empty());
}

TEST_CASE("wucs_scores examples") {
  SUBCASE("identical texts") {
    const std::vector<std::string> texts{"the cat sat", "the cat sat", "the cat sat"};
    const auto r = wucs_scores(texts);
    for (double s : r.scores) CHECK(s == doctest::Approx(1.0));
    CHECK(r.winner_index == 0);
  }
  SUBCASE("hand computed") {
    const std::vector<std::string> texts{"a b", "a c", "d"};
    const auto r = wucs_scores(texts);
    CHECK(r.scores[0] == doctest::Approx(1.0 / 6.0));
    CHECK(r.scores[1] == doctest::Approx(1.0 / 6.0));
    CHECK(r.scores[2] == 0.0);
    CHECK(r.winner_index == 0);
    CHECK(r.method == Method::kWucs);
  }
  SUBCASE("empty text scores zero") {
    const std::vector<std::string> texts{"x y", "", "x y"};
    const auto r = wucs_scores(texts);
    CHECK(r.scores[1] == 0.0);
    CHECK(r.scores[0] == doctest::Approx(0.5));
  }
  SUBCASE("two blanks never agree") {
    const std::vector<std::string> texts{"", ""};
    CHECK(wucs_scores(texts).scores[0] == 0.0);
  }
  SUBCASE("too few") {
    const std::vector<std::string> texts{"a"};
    CHECK(kind_of([&] { wucs_scores(texts); }) == ErrorKind::kTooFewCandidates);
  }
}

TEST_CASE("wucs agrees with the oracle and is symmetric and order-free") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> word(0, 7);
  std::uniform_int_distribution<int> length(0, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 7;
    std::vector<std::vector<std::string>> tokens(n);
    std::vector<std::string> texts;
    for (auto& list : tokens) {
      const int len = length(rng);
      for (int k = 0; k < len; ++k) list.push_back("w" + std::to_string(word(rng)));
      texts.push_back(join(list));
    }
    const auto r = wucs_scores(texts);
    for (std::size_t i = 0; i < n; ++i) {
      double expected = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        expected += oracle::weighted_jaccard(tokens[i], tokens[j]);
        const auto a = term_frequencies(texts[i]);
        const auto b = term_frequencies(texts[j]);
        CHECK(weighted_jaccard(a, b) == weighted_jaccard(b, a));
      }
      expected /= static_cast<double>(n - 1);
      CHECK(std::abs(r.scores[i] - expected) <= 1e-12);
    }

    auto shuffled = tokens;
    for (auto& list : shuffled) std::shuffle(list.begin(), list.end(), rng);
    std::vector<std::string> shuffled_texts;
    for (const auto& list : shuffled) shuffled_texts.push_back(join(list));
    const auto rs = wucs_scores(shuffled_texts);
    for (std::size_t i = 0; i < n; ++i) CHECK(rs.scores[i] == r.scores[i]);
  }
}
