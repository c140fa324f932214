// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgs/backends.hpp"
#include "vgs/core.hpp"

namespace vgs {

struct SearchResult {
  // Frozen completed trajectories in the order they were frozen, followed by
  // the survivors of the last Verify&Select.
  std::vector<Trajectory> final_candidates;
  // Every scored candidate, in scoring order.
  std::vector<Trajectory> all_candidates;
  CostLedger ledger;
  // Scores of each Verify&Select pool, one entry per cycle.
  std::vector<std::vector<double>> per_cycle_scores;
  // Set when a backend failed and the result is partial.
  std::optional<std::string> error;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchOptions {
  // Threads used for proposer and verifier calls within one cycle.
  std::uint32_t workers = 1;
  // First root slot; distinct subtrees of one question use disjoint slots.
  std::uint64_t root_slot_offset = 0;
};

/// Indices of the `keep` highest scores, best first; equal scores keep
/// ascending index order.
std::vector<std::size_t> select_top(std::span<const double> scores, std::size_t keep);

std::vector<Trajectory> verify_select(std::span<const Trajectory> candidates,
                                      std::span<const double> scores, std::size_t beam_width);

/// Variable-granularity search.
///
/// Each cycle extends every live beam by g-1 single steps, branches it into
/// B2 one-step continuations, scores the pool and keeps the top B1. Cycle 0
/// starts from B1 root slots, so each cycle costs B1*(g-1+B2) proposer steps
/// and B1*B2 verifier calls until trajectories start finishing. A beam that
/// completes is frozen into the final pool and its slot is not refilled.
/// Stops when no beam is live or after max_cycles cycles; survivors still
/// live at that point are marked Truncated.
///
/// g = 1 is beam search. With g at least the solution length, max_cycles = 1
/// and B2 = 1 it is Best-of-B1.
SearchResult vg_search(const SearchConfig& config, const Proposer& proposer,
                       const Verifier& verifier, const Question& question,
                       const SearchOptions& options = {});

/// Plain step-level beam search, written independently of vg_search so the
/// two can be checked against each other. config.g is ignored.
SearchResult reference_beam_search(const SearchConfig& config, const Proposer& proposer,
                                   const Verifier& verifier, const Question& question);

/// n independent rollouts of at most max_steps steps, each scored once.
/// Final candidates are ranked by score, completed ones first.
SearchResult best_of_n(std::uint32_t n, const Proposer& proposer, const Verifier& verifier,
                       const Question& question, std::uint32_t max_steps, std::uint64_t seed);

/// Diverse verifier tree search: n/M independent vg_search subtrees, each with
/// B1 = M/B2. Results are concatenated in subtree order.
SearchResult dvts(std::uint32_t n, std::uint32_t subtree_width, const SearchConfig& config,
                  const Proposer& proposer, const Verifier& verifier, const Question& question,
                  const SearchOptions& options = {});

}  // namespace vgs
