// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vgs/backends.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "vgs/seed.hpp"

namespace vgs {

namespace {

constexpr std::uint64_t kNoisySalt = 0x6e6f697379ULL;
constexpr std::uint64_t kFlipSalt = 0x666c6970ULL;
constexpr std::uint64_t kScriptSalt = 0x736372697074ULL;

}  // namespace

std::uint64_t node_seed(const ProposeRequest& request) {
  return seed::derive({request.seed, seed::hash_string(request.trajectory.prompt_id),
                       request.trajectory.child_lineage(request.branch_index)});
}

// --- IMT -------------------------------------------------------------------

char imt_symbol(std::uint32_t index) { return static_cast<char>('a' + index); }

void validate(const ImtTask& task) {
  if (task.alphabet_size < 1 || task.alphabet_size > 26) {
    throw std::invalid_argument("IMT alphabet size must be in [1, 26]");
  }
  if (task.target.empty()) throw std::invalid_argument("IMT target must be non-empty");
  for (char c : task.target) {
    if (c < 'a' || c >= imt_symbol(task.alphabet_size)) {
      throw std::invalid_argument(fmt::format("IMT target character '{}' outside alphabet", c));
    }
  }
}

GenerationStep imt_propose(const ImtTask& task, const Trajectory& trajectory,
                           std::uint64_t node_seed) {
  if (trajectory.length() >= task.target.size()) {
    throw std::logic_error("imt_propose: trajectory already spans the target");
  }
  std::mt19937_64 engine(node_seed);
  GenerationStep step;
  step.text = std::string(1, imt_symbol(static_cast<std::uint32_t>(
                                 seed::below(engine, task.alphabet_size))));
  step.token_count = 1;
  step.is_terminal = trajectory.length() + 1 >= task.target.size();
  return step;
}

double imt_verify(const ImtTask& task, const Trajectory& trajectory) {
  std::size_t pos = 0;
  for (const auto& step : trajectory.steps) {
    if (pos + step.text.size() > task.target.size()) return 0.0;
    if (task.target.compare(pos, step.text.size(), step.text) != 0) return 0.0;
    pos += step.text.size();
  }
  return 1.0;
}

std::string imt_random_target(std::uint32_t alphabet_size, std::size_t length,
                              std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::string target;
  target.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    target.push_back(imt_symbol(static_cast<std::uint32_t>(seed::below(engine, alphabet_size))));
  }
  return target;
}

GenerationStep ImtProposer::propose(const ProposeRequest& request) const {
  const ImtTask task{alphabet_size_, request.question.answer};
  return imt_propose(task, request.trajectory, node_seed(request));
}

Verdict ImtVerifier::score(const Question& question, const Trajectory& trajectory,
                           std::uint64_t /*seed*/) const {
  const ImtTask task{alphabet_size_, question.answer};
  return {imt_verify(task, trajectory), {}};
}

// --- Bernoulli tree ----------------------------------------------------------

void validate(const BernoulliTreeTask& task) {
  if (!(task.step_success_p > 0.0 && task.step_success_p <= 1.0)) {
    throw std::invalid_argument("Bernoulli step_success_p must lie in (0, 1]");
  }
  if (task.solution_length < 1) {
    throw std::invalid_argument("Bernoulli solution_length must be >= 1");
  }
  if (task.answer_labels.size() < 2) {
    throw std::invalid_argument("Bernoulli task needs at least two answer labels");
  }
}

bool bernoulli_prefix_correct(const Trajectory& trajectory) {
  return std::all_of(trajectory.steps.begin(), trajectory.steps.end(),
                     [](const GenerationStep& s) { return !s.text.empty() && s.text[0] == '+'; });
}

GenerationStep bernoulli_propose(const BernoulliTreeTask& task, const std::string& true_label,
                                 const Trajectory& trajectory, std::uint64_t node_seed) {
  const std::size_t depth = trajectory.length() + 1;
  if (depth > task.solution_length) {
    throw std::logic_error("bernoulli_propose: trajectory already complete");
  }
  std::mt19937_64 engine(node_seed);
  const bool correct =
      bernoulli_prefix_correct(trajectory) && seed::unit(engine) < task.step_success_p;

  GenerationStep step;
  step.text = correct ? "+" : "-";
  if (depth == task.solution_length) {
    std::string label = true_label;
    if (!correct) {
      std::vector<const std::string*> wrong;
      for (const auto& l : task.answer_labels) {
        if (l != true_label) wrong.push_back(&l);
      }
      label = *wrong[seed::below(engine, wrong.size())];
    }
    step.text += "\\boxed{" + label + "}";
    step.is_terminal = true;
  } else {
    step.text += "s" + std::to_string(depth);
  }
  step.token_count = step.text.size();
  return step;
}

double oracle_verify(const BernoulliTreeTask& /*task*/, const Trajectory& trajectory) {
  return bernoulli_prefix_correct(trajectory) ? 1.0 : 0.0;
}

BernoulliProposer::BernoulliProposer(BernoulliTreeTask task) : task_(std::move(task)) {
  validate(task_);
}

GenerationStep BernoulliProposer::propose(const ProposeRequest& request) const {
  return bernoulli_propose(task_, request.question.answer, request.trajectory,
                           node_seed(request));
}

Verdict OracleVerifier::score(const Question& /*question*/, const Trajectory& trajectory,
                              std::uint64_t /*seed*/) const {
  return {oracle_verify(task_, trajectory), {}};
}

// --- Scripted tree -------------------------------------------------------------

ScriptedProposer::ScriptedProposer(ScriptedTree tree) : tree_(tree) {
  if (tree_.step_width < 1) throw std::invalid_argument("scripted step_width must be >= 1");
  if (tree_.min_depth < 1 || tree_.min_depth > tree_.max_depth) {
    throw std::invalid_argument("scripted tree needs 1 <= min_depth <= max_depth");
  }
}

GenerationStep ScriptedProposer::propose(const ProposeRequest& request) const {
  const std::size_t depth = request.trajectory.length() + 1;
  std::mt19937_64 engine(node_seed(request));
  GenerationStep step;
  step.text.reserve(tree_.step_width);
  for (std::uint32_t i = 0; i < tree_.step_width; ++i) {
    step.text.push_back(static_cast<char>('a' + seed::below(engine, 16)));
  }
  step.token_count = tree_.step_width;
  step.is_terminal = depth >= tree_.max_depth ||
                     (depth >= tree_.min_depth && seed::unit(engine) < tree_.stop_probability);
  return step;
}

Verdict ScriptedVerifier::score(const Question& /*question*/, const Trajectory& trajectory,
                                std::uint64_t seed) const {
  const std::uint64_t h = seed::derive(
      {seed, kScriptSalt, seed::hash_string(trajectory.prompt_id),
       seed::hash_string(trajectory.joined_text("|"))});
  return {seed::to_unit(h), {}};
}

// --- Wrappers -------------------------------------------------------------------

double noisy_score(const Trajectory& trajectory, std::uint64_t seed) {
  return seed::to_unit(seed::derive({seed, kNoisySalt, seed::hash_string(trajectory.prompt_id),
                                     trajectory.lineage, trajectory.length()}));
}

Verdict NoisyVerifier::score(const Question& /*question*/, const Trajectory& trajectory,
                             std::uint64_t seed) const {
  return {noisy_score(trajectory, seed), {}};
}

double ensemble_score(const std::vector<double>& member_scores) {
  if (member_scores.empty()) throw std::invalid_argument("ensemble needs at least one member");
  double sum = 0.0;
  for (double s : member_scores) sum += s;
  return std::clamp(sum / static_cast<double>(member_scores.size()), 0.0, 1.0);
}

EnsembleVerifier::EnsembleVerifier(std::vector<std::shared_ptr<const Verifier>> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("ensemble needs at least one member");
}

Verdict EnsembleVerifier::score(const Question& question, const Trajectory& trajectory,
                                std::uint64_t seed) const {
  std::vector<double> scores;
  scores.reserve(members_.size());
  for (const auto& m : members_) scores.push_back(m->score(question, trajectory, seed).score);
  return {ensemble_score(scores), {}};
}

FlipVerifier::FlipVerifier(std::shared_ptr<const Verifier> inner, double flip_probability)
    : inner_(std::move(inner)), flip_probability_(flip_probability) {
  if (!inner_) throw std::invalid_argument("flip verifier needs an inner verifier");
  if (!(flip_probability_ >= 0.0 && flip_probability_ <= 1.0)) {
    throw std::invalid_argument("flip probability must lie in [0, 1]");
  }
}

Verdict FlipVerifier::score(const Question& question, const Trajectory& trajectory,
                            std::uint64_t seed) const {
  Verdict v = inner_->score(question, trajectory, seed);
  const double u = seed::to_unit(seed::derive(
      {seed, kFlipSalt, seed::hash_string(trajectory.prompt_id), trajectory.lineage}));
  if (u < flip_probability_) v.score = 1.0 - v.score;
  return v;
}

}  // namespace vgs
