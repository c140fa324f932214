// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vgs/core.hpp"

namespace vgs {

using Answer = std::optional<std::string>;

/// Content of the last \boxed{...} in `text` with surrounding whitespace
/// trimmed and inner runs collapsed to one space. Nested braces are matched.
Answer canonicalize_answer(std::string_view text);

/// Pulls a canonical answer out of a trajectory.
using AnswerExtractor = std::function<Answer(const Trajectory&)>;

/// Default extractor: canonicalize_answer over the trajectory text.
AnswerExtractor boxed_answer_extractor();

enum class VoteMode { Majority, Weighted };

struct AnswerGroup {
  std::string canonical_answer;
  // (candidate index, weight)
  std::vector<std::pair<std::size_t, double>> members;
  double total_weight = 0.0;
};

/// Groups non-empty answers in order of first occurrence. In Majority mode
/// every member weighs 1.
std::vector<AnswerGroup> group_answers(std::span<const Answer> answers,
                                       std::span<const double> weights, VoteMode mode);

/// Most frequent answer; ties go to the answer seen first.
Answer majority_vote(std::span<const Answer> answers);

/// Answer with the largest summed score. Ties fall back to member count, then
/// to first occurrence.
Answer weighted_vote(std::span<const Answer> answers, std::span<const double> scores);

enum class ScoreMode { Final, Cumulative };

/// Index of the trajectory with the highest last (Final) or summed
/// (Cumulative) score; lowest index wins ties.
std::size_t best_score_select(std::span<const Trajectory> trajectories, ScoreMode mode);

double last_score(std::span<const double> history);
double cumulative_score(std::span<const double> history);

enum class AggregationPolicy { Majority, WeightedLast, WeightedCumulative, BestFinal, BestCumulative };

AggregationPolicy parse_aggregation_policy(std::string_view name);
std::string_view to_string(AggregationPolicy policy);

/// Final answer of a set of candidates under `policy`. Candidates without an
/// extractable answer do not vote.
Answer aggregate_answer(std::span<const Trajectory> candidates, AggregationPolicy policy,
                        const AnswerExtractor& extract);

}  // namespace vgs
