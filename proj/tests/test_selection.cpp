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
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "consensus/error.hpp"
#include "consensus/selection.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace consensus;
using support::kind_of;

namespace {

SimilarityMatrix from_dense(const oracle::Matrix& m) { return SimilarityMatrix::from_values(m.size(), oracle::flatten(m)); }

oracle::Matrix constant(std::size_t n, double c) {
  oracle::Matrix m(n, std::vector<double>(n, c));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

oracle::Matrix three() { return {{1.0, 0.9, 0.1}, {0.9, 1.0, 0.2}, {0.1, 0.2, 1.0}}; }

oracle::Matrix bridge() {
  return {{1.0, 0.8, 0.5, 0.0}, {0.8, 1.0, 0.5, 0.0}, {0.5, 0.5, 1.0, 0.5}, {0.0, 0.0, 0.5, 1.0}};
}

oracle::Matrix cluster_outliers() {
  oracle::Matrix m = constant(5, 0.1);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) m[i][j] = 0.95;
  return m;
}

oracle::Matrix planted(std::size_t n, std::size_t m, double a, double b, std::vector<std::size_t> members) {
  oracle::Matrix s = constant(n, b);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y)
      if (x != y) s[members[x]][members[y]] = a;
  return s;
}

}  // namespace

TEST_CASE("method names roundtrip") {
  for (Method m : {Method::kLsc, Method::kLscTopK, Method::kLscMean, Method::kSc, Method::kWucs, Method::kUsc,
                   Method::kRandom}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_FALSE(parse_method("LSC").has_value());
}

TEST_CASE("select_exp_weighted examples") {
  SUBCASE("constant similarities tie to index 0") {
    const auto r = select_exp_weighted(from_dense(constant(5, 0.3)));
    CHECK(r.winner_index == 0);
    for (double w : r.scores) CHECK(w == r.scores[0]);
    CHECK(r.method == Method::kLsc);
    CHECK_FALSE(r.k_star.has_value());
  }
  SUBCASE("three candidates") {
    const auto r = select_exp_weighted(from_dense(three()));
    CHECK(r.scores[0] == doctest::Approx(3.6355).epsilon(1e-4));
    CHECK(r.scores[1] == doctest::Approx(3.7707).epsilon(1e-4));
    CHECK(r.scores[2] == doctest::Approx(1.3566).epsilon(1e-4));
    CHECK(r.winner_index == 1);
    const auto expected = oracle::exp_weighted(three(), 0.5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.scores[i] == doctest::Approx(expected[i]).epsilon(1e-14));
  }
  SUBCASE("bridge instance favours the tight pair") {
    const auto r = select_exp_weighted(from_dense(bridge()));
    CHECK(r.winner_index == 0);
    CHECK(r.scores[0] == doctest::Approx(2.890).epsilon(1e-3));
    CHECK(r.scores[2] == doctest::Approx(2.718).epsilon(1e-3));
  }
  SUBCASE("tau must be positive") {
    SelectionConfig cfg;
    cfg.tau_prime = 0.0;
    CHECK(kind_of([&] { select_exp_weighted(from_dense(three()), cfg); }) == ErrorKind::kInvalidArgument);
  }
}

TEST_CASE("select_arithmetic_mean examples") {
  SUBCASE("constant similarities") {
    const auto r = select_arithmetic_mean(from_dense(constant(4, -0.2)));
    CHECK(r.winner_index == 0);
    for (double w : r.scores) CHECK(w == doctest::Approx(-0.2));
  }
  SUBCASE("bridge instance favours the bridge") {
    const auto r = select_arithmetic_mean(from_dense(bridge()));
    CHECK(r.winner_index == 2);
    CHECK(r.scores[2] == doctest::Approx(0.5));
    CHECK(r.scores[0] == doctest::Approx(1.3 / 3.0));
    CHECK(r.method == Method::kLscMean);
  }
  SUBCASE("two candidates") {
    const auto r = select_arithmetic_mean(from_dense({{1.0, 0.4}, {0.4, 1.0}}));
    CHECK(r.scores[0] == 0.4);
    CHECK(r.scores[1] == 0.4);
    CHECK(r.winner_index == 0);
  }
}

TEST_CASE("topk_mean_scores examples") {
  const auto s = from_dense(cluster_outliers());
  CHECK(topk_mean_scores(s, 2)[0] == doctest::Approx(0.95));
  CHECK(topk_mean_scores(s, 3)[0] == doctest::Approx(2.0 / 3.0));
  CHECK(topk_mean_scores(s, 4)[0] == doctest::Approx(0.525));
  for (std::size_t k = 2; k <= 4; ++k) CHECK(topk_mean_scores(s, k)[3] == doctest::Approx(0.1));

  const auto full = topk_mean_scores(s, 4);
  const auto mean = select_arithmetic_mean(s).scores;
  for (std::size_t i = 0; i < 5; ++i) CHECK(full[i] == doctest::Approx(mean[i]).epsilon(1e-14));

  const auto t = from_dense(three());
  const auto k2 = topk_mean_scores(t, 2);
  CHECK(k2[0] == doctest::Approx(0.5));
  CHECK(k2[1] == doctest::Approx(0.55));
  CHECK(k2[2] == doctest::Approx(0.15));

  CHECK(kind_of([&] { topk_mean_scores(s, 1); }) == ErrorKind::kKOutOfRange);
  CHECK(kind_of([&] { topk_mean_scores(s, 5); }) == ErrorKind::kKOutOfRange);
}

TEST_CASE("select_dynamic_topk examples") {
  SUBCASE("cluster with outliers") {
    const auto trace = dynamic_topk_trace(from_dense(cluster_outliers()));
    REQUIRE(trace.drops.size() == 2);
    CHECK(trace.drops[0] == doctest::Approx(0.2833).epsilon(1e-3));
    CHECK(trace.drops[1] == doctest::Approx(0.1417).epsilon(1e-3));
    CHECK(trace.k_star == 2u);
    const auto r = select_dynamic_topk(from_dense(cluster_outliers()));
    CHECK(r.winner_index == 0);
    CHECK(r.k_star == 2u);
    CHECK(r.method == Method::kLscTopK);
  }
  SUBCASE("constant similarities fall back to N-1") {
    const auto r = select_dynamic_topk(from_dense(constant(6, 0.4)));
    CHECK(r.k_star == 5u);
    CHECK(r.winner_index == 0);
  }
  SUBCASE("three candidates use K=2") {
    const auto r = select_dynamic_topk(from_dense(three()));
    CHECK(r.k_star == 2u);
    CHECK(r.winner_index == 1);
  }
  SUBCASE("two candidates have no admissible K") {
    const auto r = select_dynamic_topk(from_dense({{1.0, 0.1}, {0.1, 1.0}}));
    CHECK_FALSE(r.k_star.has_value());
    CHECK(r.winner_index == 0);
    CHECK(r.method == Method::kLscTopK);
  }
}

TEST_CASE("confidence_of_selection examples") {
  CHECK(confidence_of_selection(from_dense(constant(4, 1.0)), 2) == 1.0);
  CHECK(confidence_of_selection(from_dense(constant(4, 0.0)), 1) == 0.5);
  CHECK(confidence_of_selection(from_dense(three()), 0) == doctest::Approx(0.75));
  CHECK(kind_of([] { confidence_of_selection(from_dense(three()), 3); }) == ErrorKind::kIndexOutOfRange);
}

TEST_CASE("selection agrees with the brute-force oracle on random matrices") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 11;
    const auto dense = oracle::random_similarity(rng, n);
    const auto s = from_dense(dense);

    const auto exp = select_exp_weighted(s);
    const auto exp_ref = oracle::exp_weighted(dense, 0.5);
    CHECK(exp.winner_index == oracle::first_max(exp_ref));
    for (std::size_t i = 0; i < n; ++i) CHECK(exp.scores[i] == doctest::Approx(exp_ref[i]).epsilon(1e-13));

    const auto mean = select_arithmetic_mean(s);
    CHECK(mean.winner_index == oracle::first_max(oracle::arithmetic(dense)));

    for (std::size_t k = 2; k + 1 <= n; ++k) {
      const auto got = topk_mean_scores(s, k);
      const auto ref = oracle::topk(dense, k);
      for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-13));
    }

    const auto topk = select_dynamic_topk(s);
    const auto topk_ref = oracle::dynamic_topk(dense);
    CHECK(topk.winner_index == topk_ref.winner);
    CHECK(topk.k_star == topk_ref.k_star);

    for (const auto& r : {exp, mean, topk}) {
      CHECK(r.winner_index < n);
      CHECK(r.scores[r.winner_index] == *std::max_element(r.scores.begin(), r.scores.end()));
      CHECK(r.confidence >= 0.0);
      CHECK(r.confidence <= 1.0);
      if (r.k_star) {
        CHECK(*r.k_star >= 2);
        CHECK(*r.k_star <= n - 1);
      }
    }
  }
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 8;
    // Continuous entries only, so the winner is unique and tie-breaks do not interfere.
    oracle::Matrix dense(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) dense[i][j] = dense[j][i] = unit(rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    oracle::Matrix permuted(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) permuted[i][j] = dense[perm[i]][perm[j]];

    const auto a = from_dense(dense);
    const auto b = from_dense(permuted);
    const auto check = [&](const SelectionResult& orig, const SelectionResult& moved) {
      for (std::size_t i = 0; i < n; ++i) CHECK(moved.scores[i] == doctest::Approx(orig.scores[perm[i]]).epsilon(1e-13));
      CHECK(perm[moved.winner_index] == orig.winner_index);
    };
    check(select_exp_weighted(a), select_exp_weighted(b));
    check(select_arithmetic_mean(a), select_arithmetic_mean(b));
    for (std::size_t k = 2; k + 1 <= n; ++k) {
      const auto ka = topk_mean_scores(a, k);
      const auto kb = topk_mean_scores(b, k);
      for (std::size_t i = 0; i < n; ++i) CHECK(kb[i] == doctest::Approx(ka[perm[i]]).epsilon(1e-13));
    }
  }
}

TEST_CASE("two candidates always select index 0") {
  for (double tau : {1e-3, 0.05, 0.5, 1.0, 10.0})
    for (double s : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
      SelectionConfig cfg;
      cfg.tau_prime = tau;
      CHECK(select_exp_weighted(from_dense({{1.0, s}, {s, 1.0}}), cfg).winner_index == 0);
    }
}

TEST_CASE("row dominance implies score dominance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 0.8);
  std::uniform_real_distribution<double> bump(0.01, 0.2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 8;
    oracle::Matrix m(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m[i][j] = m[j][i] = unit(rng);
    // Make row 0 dominate row 1 outside {0, 1}.
    for (std::size_t k = 2; k < n; ++k) {
      const double v = std::min(1.0, m[1][k] + (k == 2 ? bump(rng) : 0.0));
      m[0][k] = m[k][0] = v;
    }
    const auto s = from_dense(m);
    const auto exp = select_exp_weighted(s).scores;
    const auto mean = select_arithmetic_mean(s).scores;
    CHECK(exp[0] > exp[1]);
    CHECK(mean[0] > mean[1]);
  }
}

TEST_CASE("top-K scores and their maxima are non-increasing in K") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + trial % 9;
    const auto s = from_dense(oracle::random_similarity(rng, n));
    for (std::size_t k = 3; k + 1 <= n; ++k) {
      const auto prev = topk_mean_scores(s, k - 1);
      const auto cur = topk_mean_scores(s, k);
      for (std::size_t i = 0; i < n; ++i) CHECK(cur[i] <= prev[i] + 1e-15);
    }
    const auto trace = dynamic_topk_trace(s);
    for (double d : trace.drops) CHECK(d >= -1e-15);
  }
}

TEST_CASE("dynamic top-K recovers a planted clique") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> base(-0.5, 0.6);
  std::uniform_real_distribution<double> gap(0.3, 0.9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + trial % 8;
    const std::size_t m = 3 + static_cast<std::size_t>(trial) % (n - 4);
    const double b = base(rng);
    const double a = std::min(1.0, b + gap(rng));
    if (a - b < 0.3) continue;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> members(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));

    const auto dense = planted(n, m, a, b, members);
    const auto r = select_dynamic_topk(from_dense(dense));
    CHECK(std::find(members.begin(), members.end(), r.winner_index) != members.end());
    CHECK(r.k_star == m - 1);
    CHECK(oracle::dynamic_topk(dense).k_star == m - 1);
  }
}
