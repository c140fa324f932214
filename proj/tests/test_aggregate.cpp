// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vgs/aggregate.hpp"
#include "vgs/search.hpp"

using namespace vgs;

namespace {

Trajectory with_history(std::vector<double> history, const std::string& text = "x") {
  Trajectory t = Trajectory::root("q", 0);
  t.append({text, 1, true, false}, 0);
  t.score_history = std::move(history);
  return t;
}

}  // namespace

TEST_CASE("canonicalize_answer corpus") {
  const std::vector<std::pair<std::string, Answer>> corpus = {
      {"so \\boxed{42}", "42"},
      {"no box here", std::nullopt},
      {"\\boxed{1/2} then \\boxed{ 1/2 }", "1/2"},
      {"\\boxed{}", std::nullopt},
      {"\\boxed{   }", std::nullopt},
      {"\\boxed{\\frac{1}{2}}", "\\frac{1}{2}"},
      {"\\boxed{a  b}", "a b"},
      {"\\boxed{\n7\n}", "7"},
      {"\\boxed{3", std::nullopt},
      {"\\boxed{x} and \\boxed{y}", "y"},
      {"text \\boxed{{nested}} end", "{nested}"},
      {"\\boxed{x^{2}+1}.", "x^{2}+1"},
      {"boxed{5}", std::nullopt},
      {"", std::nullopt},
      {"\\boxed{-3}", "-3"},
      {"\\boxed{ 1,\t2 }", "1, 2"},
      {"\\boxed{A}\n\n", "A"},
      {"\\boxed{\\text{yes}}", "\\text{yes}"},
      {"\\boxed{1} \\boxed{2", std::nullopt},
      {"answer: \\boxed{0.5}", "0.5"},
  };
  CHECK(corpus.size() == 20);
  for (const auto& [text, expected] : corpus) {
    INFO(text);
    CHECK(canonicalize_answer(text) == expected);
  }
}

TEST_CASE("majority vote examples and counting oracle") {
  CHECK(majority_vote(std::vector<Answer>{"4", "4", "7"}) == Answer("4"));
  CHECK(majority_vote(std::vector<Answer>{"a", "b"}) == Answer("a"));
  CHECK(majority_vote(std::vector<Answer>{std::nullopt, std::nullopt}) == std::nullopt);
  CHECK(majority_vote(std::vector<Answer>{}) == std::nullopt);

  testing::Gen gen(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto answers = testing::random_answers(gen);
    CHECK(majority_vote(answers) == testing::counting_oracle(answers));
  }
}

TEST_CASE("weighted vote examples and summing oracle") {
  CHECK(weighted_vote(std::vector<Answer>{"A", "B", "B"}, std::vector<double>{0.9, 0.5, 0.5}) ==
        Answer("B"));
  CHECK(weighted_vote(std::vector<Answer>{}, std::vector<double>{}) == std::nullopt);
  CHECK_THROWS_AS(weighted_vote(std::vector<Answer>{"A"}, std::vector<double>{}),
                  std::invalid_argument);

  testing::Gen gen(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto answers = testing::random_answers(gen);
    std::vector<double> w(answers.size());
    for (auto& x : w) x = static_cast<double>(gen.below(5)) / 4.0;
    CHECK(weighted_vote(answers, w) == testing::summing_oracle(answers, w));
  }
}

TEST_CASE("uniform weights reduce weighted voting to majority voting") {
  testing::Gen gen(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto answers = testing::random_answers(gen);
    const double w = gen.coin(0.1) ? 0.0 : gen.unit();
    CHECK(weighted_vote(answers, std::vector<double>(answers.size(), w)) == majority_vote(answers));
  }
}

TEST_CASE("voting winners are permutation invariant up to ties") {
  testing::Gen gen(4);
  for (int trial = 0; trial < 1000; ++trial) {
    auto answers = testing::random_answers(gen);
    const auto winner = majority_vote(answers);
    std::map<std::string, int> counts;
    for (const auto& a : answers) {
      if (a) counts[*a]++;
    }
    std::sort(answers.begin(), answers.end());
    const auto sorted_winner = majority_vote(answers);
    CHECK(winner.has_value() == sorted_winner.has_value());
    if (winner) CHECK(counts[*winner] == counts[*sorted_winner]);
  }
}

TEST_CASE("group_answers totals") {
  const std::vector<Answer> answers = {"x", std::nullopt, "y", "x"};
  const auto groups = group_answers(answers, std::vector<double>{0.5, 0.9, 0.25, 0.25},
                                    VoteMode::Weighted);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].canonical_answer == "x");
  CHECK(groups[0].total_weight == 0.75);
  CHECK(groups[0].members.size() == 2);
  const auto counted = group_answers(answers, {}, VoteMode::Majority);
  CHECK(counted[0].total_weight == 2.0);
  CHECK(counted[1].total_weight == 1.0);
}

TEST_CASE("best-score selection") {
  const std::vector<Trajectory> ts = {with_history({0.2, 0.9}), with_history({0.8, 0.5})};
  CHECK(best_score_select(ts, ScoreMode::Final) == 0);
  CHECK(best_score_select(ts, ScoreMode::Cumulative) == 1);
  CHECK(best_score_select(std::span(ts).first(1), ScoreMode::Final) == 0);
  CHECK_THROWS_AS(best_score_select(std::vector<Trajectory>{}, ScoreMode::Final),
                  std::invalid_argument);

  testing::Gen gen(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Trajectory> pool(gen.between(1, 10));
    std::vector<std::vector<double>> histories;
    std::vector<double> last;
    for (auto& t : pool) {
      std::vector<double> h(gen.between(1, 5));
      for (auto& s : h) s = static_cast<double>(gen.below(5)) / 4.0;
      t = with_history(h);
      histories.push_back(h);
      last.push_back(h.back());
    }
    const std::size_t best_final = testing::best_final_oracle(histories);
    CHECK(best_score_select(pool, ScoreMode::Final) == best_final);
    CHECK(best_score_select(pool, ScoreMode::Cumulative) == testing::best_cumulative_oracle(histories));
    CHECK(verify_select(pool, last, 1).front() == pool[best_final]);
  }
}

TEST_CASE("last and cumulative scores") {
  CHECK(last_score(std::vector<double>{0.3}) == 0.3);
  CHECK(last_score(std::vector<double>{0.9, 0.1}) == 0.1);
  CHECK(cumulative_score(std::vector<double>{0.5, 0.25}) == 0.75);
  CHECK_THROWS_AS(last_score(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(cumulative_score(std::vector<double>{}), std::invalid_argument);
  testing::Gen gen(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto h = gen.scores(gen.between(1, 9));
    CHECK(last_score(h) == h[h.size() - 1]);
  }
}

TEST_CASE("aggregate_answer applies each policy") {
  const std::vector<Trajectory> pool = {
      with_history({0.9}, "\\boxed{1}"), with_history({0.4}, "\\boxed{2}"),
      with_history({0.3}, "\\boxed{2}"), with_history({0.1}, "nothing")};
  const auto extract = boxed_answer_extractor();
  CHECK(aggregate_answer(pool, AggregationPolicy::Majority, extract) == Answer("2"));
  CHECK(aggregate_answer(pool, AggregationPolicy::WeightedLast, extract) == Answer("1"));
  CHECK(aggregate_answer(pool, AggregationPolicy::BestFinal, extract) == Answer("1"));
  CHECK(aggregate_answer(std::vector<Trajectory>{}, AggregationPolicy::Majority, extract) ==
        std::nullopt);

  for (auto p : {AggregationPolicy::Majority, AggregationPolicy::WeightedLast,
                 AggregationPolicy::WeightedCumulative, AggregationPolicy::BestFinal,
                 AggregationPolicy::BestCumulative}) {
    CHECK(parse_aggregation_policy(to_string(p)) == p);
  }
  CHECK_THROWS_AS(parse_aggregation_policy("median"), std::invalid_argument);
}
