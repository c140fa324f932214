// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgs/core.hpp"

namespace vgs {

/// A task instance. `answer` is the ground truth used for grading; synthetic
/// backends also read it to define the task (IMT target, Bernoulli label).
struct Question {
  std::string id;
  std::string text;
  std::string answer;
  std::string difficulty = "all";
};

/// Failure talking to a backend. `retryable` marks transport-level errors.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& message, bool retryable)
      : std::runtime_error(message), retryable_(retryable) {}
  [[nodiscard]] bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

struct ProposeRequest {
  const Question& question;
  const Trajectory& trajectory;
  std::uint64_t seed = 0;
  std::uint32_t cycle_index = 0;
  std::uint64_t branch_index = 0;
};

struct Verdict {
  double score = 0.0;
  std::vector<double> step_scores;
};

/// Generator G. Implementations must be deterministic in the request and
/// safe to call concurrently on distinct trajectories.
class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual GenerationStep propose(const ProposeRequest& request) const = 0;
};

/// Verifier V, scoring the full prefix of a trajectory.
class Verifier {
 public:
  virtual ~Verifier() = default;
  virtual Verdict score(const Question& question, const Trajectory& trajectory,
                        std::uint64_t seed) const = 0;
};

/// Seed for the node that `request` would create.
std::uint64_t node_seed(const ProposeRequest& request);

// ---------------------------------------------------------------------------
// Infinite-monkey testbed: one uniformly random character per step, scored by
// a perfect prefix verifier.

struct ImtTask {
  std::uint32_t alphabet_size = 2;
  std::string target;
};

/// Characters of an alphabet of size A are 'a', 'b', ...
char imt_symbol(std::uint32_t index);
void validate(const ImtTask& task);
GenerationStep imt_propose(const ImtTask& task, const Trajectory& trajectory,
                           std::uint64_t node_seed);
double imt_verify(const ImtTask& task, const Trajectory& trajectory);
/// Seeded random target of `length` characters.
std::string imt_random_target(std::uint32_t alphabet_size, std::size_t length,
                              std::uint64_t seed);

/// The target is taken from Question::answer.
class ImtProposer final : public Proposer {
 public:
  explicit ImtProposer(std::uint32_t alphabet_size) : alphabet_size_(alphabet_size) {}
  GenerationStep propose(const ProposeRequest& request) const override;

 private:
  std::uint32_t alphabet_size_;
};

class ImtVerifier final : public Verifier {
 public:
  explicit ImtVerifier(std::uint32_t alphabet_size) : alphabet_size_(alphabet_size) {}
  Verdict score(const Question& question, const Trajectory& trajectory,
                std::uint64_t seed) const override;

 private:
  std::uint32_t alphabet_size_;
};

// ---------------------------------------------------------------------------
// Bernoulli reasoning tree: each step is correct with probability p while the
// prefix is still correct; an error is absorbing. The final step carries a
// boxed answer label.

struct BernoulliTreeTask {
  double step_success_p = 0.8;
  std::uint32_t solution_length = 4;
  std::vector<std::string> answer_labels = {"0", "1", "2", "3", "4",
                                            "5", "6", "7", "8", "9"};
};

void validate(const BernoulliTreeTask& task);
/// True iff every step of the trajectory so far is a correct step.
bool bernoulli_prefix_correct(const Trajectory& trajectory);
GenerationStep bernoulli_propose(const BernoulliTreeTask& task, const std::string& true_label,
                                 const Trajectory& trajectory, std::uint64_t node_seed);
double oracle_verify(const BernoulliTreeTask& task, const Trajectory& trajectory);

class BernoulliProposer final : public Proposer {
 public:
  explicit BernoulliProposer(BernoulliTreeTask task);
  GenerationStep propose(const ProposeRequest& request) const override;
  [[nodiscard]] const BernoulliTreeTask& task() const { return task_; }

 private:
  BernoulliTreeTask task_;
};

class OracleVerifier final : public Verifier {
 public:
  explicit OracleVerifier(BernoulliTreeTask task) : task_(std::move(task)) {}
  Verdict score(const Question& question, const Trajectory& trajectory,
                std::uint64_t seed) const override;

 private:
  BernoulliTreeTask task_;
};

// ---------------------------------------------------------------------------
// Scripted tree: fixed-width pseudo-random step text at every node, terminal
// depth drawn per path in [min_depth, max_depth]. The verifier score is a
// hash of the trajectory text, so it is a pure function of content.

struct ScriptedTree {
  std::uint32_t step_width = 4;
  std::uint32_t min_depth = 1;
  std::uint32_t max_depth = 6;
  // Probability of stopping at each depth in [min_depth, max_depth).
  double stop_probability = 0.3;
};

class ScriptedProposer final : public Proposer {
 public:
  explicit ScriptedProposer(ScriptedTree tree);
  GenerationStep propose(const ProposeRequest& request) const override;

 private:
  ScriptedTree tree_;
};

class ScriptedVerifier final : public Verifier {
 public:
  Verdict score(const Question& question, const Trajectory& trajectory,
                std::uint64_t seed) const override;
};

// ---------------------------------------------------------------------------
// Wrappers.

/// Uniform random score per (trajectory node, verification event). Ignores
/// whatever it wraps.
double noisy_score(const Trajectory& trajectory, std::uint64_t seed);

class NoisyVerifier final : public Verifier {
 public:
  Verdict score(const Question& question, const Trajectory& trajectory,
                std::uint64_t seed) const override;
};

/// Arithmetic mean of member scores.
double ensemble_score(const std::vector<double>& member_scores);

class EnsembleVerifier final : public Verifier {
 public:
  explicit EnsembleVerifier(std::vector<std::shared_ptr<const Verifier>> members);
  Verdict score(const Question& question, const Trajectory& trajectory,
                std::uint64_t seed) const override;

 private:
  std::vector<std::shared_ptr<const Verifier>> members_;
};

/// Replaces the inner score s with 1 - s with probability q, drawn per node.
class FlipVerifier final : public Verifier {
 public:
  FlipVerifier(std::shared_ptr<const Verifier> inner, double flip_probability);
  Verdict score(const Question& question, const Trajectory& trajectory,
                std::uint64_t seed) const override;

 private:
  std::shared_ptr<const Verifier> inner_;
  double flip_probability_;
};

}  // namespace vgs
