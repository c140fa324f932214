// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vgs/aggregate.hpp"

#include <cctype>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace vgs {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

Answer canonicalize_answer(std::string_view text) {
  constexpr std::string_view kOpen = "\\boxed{";
  const auto start = text.rfind(kOpen);
  if (start == std::string_view::npos) return std::nullopt;

  int depth = 1;
  std::size_t i = start + kOpen.size();
  const std::size_t content_start = i;
  for (; i < text.size(); ++i) {
    if (text[i] == '{') {
      ++depth;
    } else if (text[i] == '}') {
      if (--depth == 0) break;
    }
  }
  if (depth != 0) return std::nullopt;

  std::string answer = normalize_whitespace(text.substr(content_start, i - content_start));
  if (answer.empty()) return std::nullopt;
  return answer;
}

AnswerExtractor boxed_answer_extractor() {
  return [](const Trajectory& t) { return canonicalize_answer(t.joined_text("\n\n")); };
}

std::vector<AnswerGroup> group_answers(std::span<const Answer> answers,
                                       std::span<const double> weights, VoteMode mode) {
  if (mode == VoteMode::Weighted && weights.size() != answers.size()) {
    throw std::invalid_argument("weighted vote: answers and scores differ in length");
  }
  std::vector<AnswerGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i]) continue;
    const double w = mode == VoteMode::Weighted ? weights[i] : 1.0;
    auto [it, inserted] = index.try_emplace(*answers[i], groups.size());
    if (inserted) groups.push_back({*answers[i], {}, 0.0});
    AnswerGroup& g = groups[it->second];
    g.members.emplace_back(i, w);
    g.total_weight += w;
  }
  return groups;
}

Answer majority_vote(std::span<const Answer> answers) {
  const auto groups = group_answers(answers, {}, VoteMode::Majority);
  const AnswerGroup* best = nullptr;
  for (const auto& g : groups) {
    if (best == nullptr || g.members.size() > best->members.size()) best = &g;
  }
  if (best == nullptr) return std::nullopt;
  return best->canonical_answer;
}

Answer weighted_vote(std::span<const Answer> answers, std::span<const double> scores) {
  const auto groups = group_answers(answers, scores, VoteMode::Weighted);
  const AnswerGroup* best = nullptr;
  for (const auto& g : groups) {
    if (best == nullptr || g.total_weight > best->total_weight ||
        (g.total_weight == best->total_weight && g.members.size() > best->members.size())) {
      best = &g;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->canonical_answer;
}

double last_score(std::span<const double> history) {
  if (history.empty()) throw std::invalid_argument("last_score: empty score history");
  return history.back();
}

double cumulative_score(std::span<const double> history) {
  if (history.empty()) throw std::invalid_argument("cumulative_score: empty score history");
  return std::accumulate(history.begin(), history.end(), 0.0);
}

std::size_t best_score_select(std::span<const Trajectory> trajectories, ScoreMode mode) {
  if (trajectories.empty()) throw std::invalid_argument("best_score_select: no trajectories");
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& h = trajectories[i].score_history;
    const double s = mode == ScoreMode::Final ? last_score(h) : cumulative_score(h);
    if (i == 0 || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

AggregationPolicy parse_aggregation_policy(std::string_view name) {
  if (name == "majority") return AggregationPolicy::Majority;
  if (name == "weighted") return AggregationPolicy::WeightedLast;
  if (name == "weighted-cumulative") return AggregationPolicy::WeightedCumulative;
  if (name == "best-final") return AggregationPolicy::BestFinal;
  if (name == "best-cumulative") return AggregationPolicy::BestCumulative;
  throw std::invalid_argument("unknown aggregation policy: " + std::string(name));
}

std::string_view to_string(AggregationPolicy policy) {
  switch (policy) {
    case AggregationPolicy::Majority: return "majority";
    case AggregationPolicy::WeightedLast: return "weighted";
    case AggregationPolicy::WeightedCumulative: return "weighted-cumulative";
    case AggregationPolicy::BestFinal: return "best-final";
    case AggregationPolicy::BestCumulative: return "best-cumulative";
  }
  return "unknown";
}

Answer aggregate_answer(std::span<const Trajectory> candidates, AggregationPolicy policy,
                        const AnswerExtractor& extract) {
  if (candidates.empty()) return std::nullopt;
  switch (policy) {
    case AggregationPolicy::BestFinal:
      return extract(candidates[best_score_select(candidates, ScoreMode::Final)]);
    case AggregationPolicy::BestCumulative:
      return extract(candidates[best_score_select(candidates, ScoreMode::Cumulative)]);
    default: break;
  }
  std::vector<Answer> answers;
  std::vector<double> weights;
  for (const auto& c : candidates) {
    answers.push_back(extract(c));
    if (policy == AggregationPolicy::WeightedLast) {
      weights.push_back(last_score(c.score_history));
    } else if (policy == AggregationPolicy::WeightedCumulative) {
      weights.push_back(cumulative_score(c.score_history));
    }
  }
  if (policy == AggregationPolicy::Majority) return majority_vote(answers);
  return weighted_vote(answers, weights);
}

}  // namespace vgs
