// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vgs {

inline constexpr std::string_view kDefaultStepDelimiter = "\n\n";
inline constexpr std::string_view kDefaultTerminalPattern = "\\boxed{";

/// One delimiter-bounded chunk of generated text, the atomic unit the
/// verifier sees.
struct GenerationStep {
  std::string text;
  std::uint64_t token_count = 0;
  bool is_terminal = false;
  // Set when the backend stopped on its per-step token cap.
  bool hit_token_cap = false;

  friend bool operator==(const GenerationStep&, const GenerationStep&) = default;
};

enum class TrajectoryStatus { Active, Completed, Truncated };

std::string_view to_string(TrajectoryStatus status);

/// A candidate solution: the steps generated so far plus every score the
/// verifier has assigned to its prefixes.
///
/// `lineage` identifies the node in the implicit search tree. Root slots and
/// child indices are folded into it, so two searches that walk the same tree
/// path see the same node regardless of how they schedule work.
struct Trajectory {
  std::string prompt_id;
  std::uint64_t lineage = 0;
  std::vector<GenerationStep> steps;
  std::vector<double> score_history;
  // Per-step scores from the most recent verifier call, when the verifier
  // reports them.
  std::vector<double> step_scores;
  TrajectoryStatus status = TrajectoryStatus::Active;

  static Trajectory root(std::string prompt_id, std::uint64_t slot);

  /// Child node `branch_index` of this trajectory, before its step is known.
  [[nodiscard]] std::uint64_t child_lineage(std::uint64_t branch_index) const;

  /// Appends `step` as child `branch_index` and updates the status.
  void append(GenerationStep step, std::uint64_t branch_index);

  [[nodiscard]] bool active() const { return status == TrajectoryStatus::Active; }
  [[nodiscard]] std::size_t length() const { return steps.size(); }
  [[nodiscard]] std::string joined_text(std::string_view delimiter) const;
  [[nodiscard]] std::uint64_t token_count() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct SearchConfig {
  std::uint32_t g = 1;
  std::uint32_t beam_width = 1;     // B1
  std::uint32_t branch_factor = 4;  // B2
  std::uint32_t max_cycles = 12;    // I
  std::string step_delimiter = std::string(kDefaultStepDelimiter);
  std::uint32_t max_tokens_per_step = 2048;
  std::uint64_t seed = 0;
  // Candidates scoring strictly below this are dropped before selection.
  double reject_below = 0.0;

  /// Total candidate width n = B1 * B2.
  [[nodiscard]] std::uint64_t width() const {
    return std::uint64_t{beam_width} * branch_factor;
  }

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(message), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Returns `config` unchanged if every field is in range, throws ConfigError
/// naming the first offending field otherwise.
SearchConfig validate_config(const SearchConfig& config);

/// B1 = n / B2; n must be a positive multiple of B2.
std::uint32_t beam_width_for(std::uint64_t n, std::uint32_t branch_factor);

/// Splits `text` on `delimiter`, dropping empty pieces. A single trailing
/// delimiter is absorbed.
std::vector<GenerationStep> parse_steps(std::string_view text,
                                        std::string_view delimiter,
                                        std::string_view terminal_pattern = kDefaultTerminalPattern);

/// Exact operation counts of a run.
struct CostLedger {
  std::uint64_t proposer_steps = 0;
  std::uint64_t proposer_tokens = 0;
  std::uint64_t verifier_calls = 0;
  std::uint64_t cycles_executed = 0;

  CostLedger& operator+=(const CostLedger& other);
  friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

CostLedger merge_ledgers(const CostLedger& a, const CostLedger& b);

/// Ledger that tolerates concurrent increments from worker threads.
class SharedLedger {
 public:
  void add_step(std::uint64_t tokens) {
    proposer_steps_.fetch_add(1, std::memory_order_relaxed);
    proposer_tokens_.fetch_add(tokens, std::memory_order_relaxed);
  }
  void add_verifier_call() { verifier_calls_.fetch_add(1, std::memory_order_relaxed); }
  void add_cycle() { cycles_executed_.fetch_add(1, std::memory_order_relaxed); }

  [[nodiscard]] CostLedger snapshot() const;

 private:
  std::atomic<std::uint64_t> proposer_steps_{0};
  std::atomic<std::uint64_t> proposer_tokens_{0};
  std::atomic<std::uint64_t> verifier_calls_{0};
  std::atomic<std::uint64_t> cycles_executed_{0};
};

}  // namespace vgs
