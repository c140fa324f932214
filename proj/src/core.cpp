// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vgs/core.hpp"

#include <fmt/format.h>

#include "vgs/seed.hpp"

namespace vgs {

namespace {

constexpr std::uint64_t kRootSalt = 0x726f6f74ULL;  // "root"

std::uint64_t approx_tokens(std::string_view text) {
  return (text.size() + 3) / 4;
}

}  // namespace

std::string_view to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Active: return "active";
    case TrajectoryStatus::Completed: return "completed";
    case TrajectoryStatus::Truncated: return "truncated";
  }
  return "unknown";
}

Trajectory Trajectory::root(std::string prompt_id, std::uint64_t slot) {
  Trajectory t;
  t.prompt_id = std::move(prompt_id);
  t.lineage = seed::combine(kRootSalt, slot);
  return t;
}

std::uint64_t Trajectory::child_lineage(std::uint64_t branch_index) const {
  return seed::combine(lineage, branch_index);
}

void Trajectory::append(GenerationStep step, std::uint64_t branch_index) {
  lineage = child_lineage(branch_index);
  const bool terminal = step.is_terminal;
  const bool capped = step.hit_token_cap;
  steps.push_back(std::move(step));
  if (terminal) {
    status = TrajectoryStatus::Completed;
  } else if (capped) {
    status = TrajectoryStatus::Truncated;
  }
}

std::string Trajectory::joined_text(std::string_view delimiter) const {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out.append(delimiter);
    out.append(steps[i].text);
  }
  return out;
}

std::uint64_t Trajectory::token_count() const {
  std::uint64_t total = 0;
  for (const auto& s : steps) total += s.token_count;
  return total;
}

SearchConfig validate_config(const SearchConfig& config) {
  if (config.g < 1) throw ConfigError("g", "g must be >= 1");
  if (config.beam_width < 1) throw ConfigError("beam_width", "B1 must be >= 1");
  if (config.branch_factor < 1) throw ConfigError("branch_factor", "B2 must be >= 1");
  if (config.max_cycles < 1) throw ConfigError("max_cycles", "I must be >= 1");
  if (config.step_delimiter.empty()) {
    throw ConfigError("step_delimiter", "step delimiter must be non-empty");
  }
  if (config.max_tokens_per_step < 1) {
    throw ConfigError("max_tokens_per_step", "max_tokens_per_step must be >= 1");
  }
  if (!(config.reject_below >= 0.0 && config.reject_below <= 1.0)) {
    throw ConfigError("reject_below", "reject_below must lie in [0, 1]");
  }
  return config;
}

std::uint32_t beam_width_for(std::uint64_t n, std::uint32_t branch_factor) {
  if (branch_factor == 0) throw ConfigError("branch_factor", "B2 must be >= 1");
  if (n == 0 || n % branch_factor != 0) {
    throw ConfigError("n", fmt::format("n = {} is not a positive multiple of B2 = {}", n,
                                       branch_factor));
  }
  return static_cast<std::uint32_t>(n / branch_factor);
}

std::vector<GenerationStep> parse_steps(std::string_view text, std::string_view delimiter,
                                        std::string_view terminal_pattern) {
  if (delimiter.empty()) throw std::invalid_argument("parse_steps: empty delimiter");
  std::vector<GenerationStep> steps;
  auto emit = [&](std::string_view piece) {
    if (piece.empty()) return;
    GenerationStep step;
    step.text = std::string(piece);
    step.token_count = approx_tokens(piece);
    step.is_terminal =
        !terminal_pattern.empty() && piece.find(terminal_pattern) != std::string_view::npos;
    steps.push_back(std::move(step));
  };
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(delimiter, start);
    if (pos == std::string_view::npos) {
      emit(text.substr(start));
      break;
    }
    emit(text.substr(start, pos - start));
    start = pos + delimiter.size();
  }
  return steps;
}

CostLedger& CostLedger::operator+=(const CostLedger& other) {
  proposer_steps += other.proposer_steps;
  proposer_tokens += other.proposer_tokens;
  verifier_calls += other.verifier_calls;
  cycles_executed += other.cycles_executed;
  return *this;
}

CostLedger merge_ledgers(const CostLedger& a, const CostLedger& b) {
  CostLedger out = a;
  out += b;
  return out;
}

CostLedger SharedLedger::snapshot() const {
  CostLedger out;
  out.proposer_steps = proposer_steps_.load(std::memory_order_relaxed);
  out.proposer_tokens = proposer_tokens_.load(std::memory_order_relaxed);
  out.verifier_calls = verifier_calls_.load(std::memory_order_relaxed);
  out.cycles_executed = cycles_executed_.load(std::memory_order_relaxed);
  return out;
}

}  // namespace vgs
