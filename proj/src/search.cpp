// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vgs/search.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "vgs/parallel.hpp"

namespace vgs {

std::vector<std::size_t> select_top(std::span<const double> scores, std::size_t keep) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (order.size() > keep) order.resize(keep);
  return order;
}

std::vector<Trajectory> verify_select(std::span<const Trajectory> candidates,
                                      std::span<const double> scores, std::size_t beam_width) {
  if (candidates.size() != scores.size()) {
    throw std::invalid_argument("verify_select: candidates and scores differ in length");
  }
  std::vector<Trajectory> out;
  for (std::size_t i : select_top(scores, beam_width)) out.push_back(candidates[i]);
  return out;
}

namespace {

// Extends one beam by g-1 steps and branches it. A beam that stops during
// Extend is returned alone.
std::vector<Trajectory> expand_beam(Trajectory beam, const SearchConfig& config,
                                    std::uint32_t cycle, const Proposer& proposer,
                                    const Question& question, SharedLedger& ledger) {
  for (std::uint32_t e = 0; e + 1 < config.g && beam.active(); ++e) {
    GenerationStep step = proposer.propose({question, beam, config.seed, cycle, 0});
    ledger.add_step(step.token_count);
    beam.append(std::move(step), 0);
  }
  if (!beam.active()) return {std::move(beam)};

  std::vector<Trajectory> children;
  children.reserve(config.branch_factor);
  for (std::uint32_t b = 0; b < config.branch_factor; ++b) {
    GenerationStep step = proposer.propose({question, beam, config.seed, cycle, b});
    ledger.add_step(step.token_count);
    Trajectory child = beam;
    child.append(std::move(step), b);
    children.push_back(std::move(child));
  }
  return children;
}

}  // namespace

SearchResult vg_search(const SearchConfig& raw_config, const Proposer& proposer,
                       const Verifier& verifier, const Question& question,
                       const SearchOptions& options) {
  const SearchConfig config = validate_config(raw_config);
  SearchResult result;
  SharedLedger ledger;

  std::vector<Trajectory> beams;
  beams.reserve(config.beam_width);
  for (std::uint32_t i = 0; i < config.beam_width; ++i) {
    beams.push_back(Trajectory::root(question.id, options.root_slot_offset + i));
  }

  try {
    for (std::uint32_t cycle = 0; cycle < config.max_cycles && !beams.empty(); ++cycle) {
      std::vector<std::vector<Trajectory>> expanded(beams.size());
      parallel_for(beams.size(), options.workers, [&](std::size_t i) {
        expanded[i] = expand_beam(beams[i], config, cycle, proposer, question, ledger);
      });

      std::vector<Trajectory> pool;
      for (auto& group : expanded) {
        std::move(group.begin(), group.end(), std::back_inserter(pool));
      }
      if (pool.empty()) throw SearchError("no candidates to verify");

      std::vector<double> scores(pool.size());
      parallel_for(pool.size(), options.workers, [&](std::size_t i) {
        Verdict v = verifier.score(question, pool[i], config.seed);
        ledger.add_verifier_call();
        scores[i] = v.score;
        pool[i].score_history.push_back(v.score);
        if (!v.step_scores.empty()) pool[i].step_scores = std::move(v.step_scores);
      });
      ledger.add_cycle();
      result.all_candidates.insert(result.all_candidates.end(), pool.begin(), pool.end());
      result.per_cycle_scores.push_back(scores);

      std::vector<std::size_t> eligible;
      std::vector<double> eligible_scores;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (scores[i] >= config.reject_below) {
          eligible.push_back(i);
          eligible_scores.push_back(scores[i]);
        }
      }

      beams.clear();
      for (std::size_t k : select_top(eligible_scores, config.beam_width)) {
        Trajectory& picked = pool[eligible[k]];
        if (picked.active()) {
          beams.push_back(std::move(picked));
        } else {
          result.final_candidates.push_back(std::move(picked));
        }
      }
    }
  } catch (const BackendError& e) {
    result.error = e.what();
  }

  for (auto& beam : beams) {
    if (beam.active() && !result.error) beam.status = TrajectoryStatus::Truncated;
    result.final_candidates.push_back(std::move(beam));
  }
  result.ledger = ledger.snapshot();
  return result;
}

SearchResult reference_beam_search(const SearchConfig& raw_config, const Proposer& proposer,
                                   const Verifier& verifier, const Question& question) {
  SearchConfig config = raw_config;
  config.g = 1;
  config = validate_config(config);

  SearchResult out;
  std::vector<Trajectory> frontier;
  for (std::uint32_t slot = 0; slot < config.beam_width; ++slot) {
    frontier.push_back(Trajectory::root(question.id, slot));
  }

  try {
    std::uint32_t depth = 0;
    while (!frontier.empty() && depth < config.max_cycles) {
      std::vector<Trajectory> candidates;
      for (const Trajectory& parent : frontier) {
        for (std::uint32_t b = 0; b < config.branch_factor; ++b) {
          Trajectory child = parent;
          GenerationStep step = proposer.propose({question, parent, config.seed, depth, b});
          out.ledger.proposer_steps += 1;
          out.ledger.proposer_tokens += step.token_count;
          child.append(std::move(step), b);
          candidates.push_back(std::move(child));
        }
      }

      std::vector<double> scores;
      for (Trajectory& c : candidates) {
        Verdict v = verifier.score(question, c, config.seed);
        out.ledger.verifier_calls += 1;
        c.score_history.push_back(v.score);
        if (!v.step_scores.empty()) c.step_scores = v.step_scores;
        scores.push_back(v.score);
      }
      out.ledger.cycles_executed += 1;
      out.per_cycle_scores.push_back(scores);
      out.all_candidates.insert(out.all_candidates.end(), candidates.begin(), candidates.end());

      // Rank by (score desc, index asc) among non-rejected candidates.
      std::vector<std::pair<double, std::size_t>> ranked;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (scores[i] >= config.reject_below) ranked.emplace_back(-scores[i], i);
      }
      std::sort(ranked.begin(), ranked.end());

      frontier.clear();
      for (std::size_t r = 0; r < ranked.size() && r < config.beam_width; ++r) {
        Trajectory& c = candidates[ranked[r].second];
        if (c.status == TrajectoryStatus::Active) {
          frontier.push_back(std::move(c));
        } else {
          out.final_candidates.push_back(std::move(c));
        }
      }
      ++depth;
    }
  } catch (const BackendError& e) {
    out.error = e.what();
  }

  for (Trajectory& t : frontier) {
    if (t.status == TrajectoryStatus::Active && !out.error) t.status = TrajectoryStatus::Truncated;
    out.final_candidates.push_back(std::move(t));
  }
  return out;
}

SearchResult best_of_n(std::uint32_t n, const Proposer& proposer, const Verifier& verifier,
                       const Question& question, std::uint32_t max_steps, std::uint64_t seed) {
  if (n < 1) throw ConfigError("n", "best_of_n needs n >= 1");
  if (max_steps < 1) throw ConfigError("max_steps", "best_of_n needs max_steps >= 1");

  SearchResult out;
  std::vector<Trajectory> rollouts;
  std::vector<double> scores;
  try {
    for (std::uint32_t i = 0; i < n; ++i) {
      Trajectory t = Trajectory::root(question.id, i);
      while (t.active() && t.length() < max_steps) {
        GenerationStep step = proposer.propose({question, t, seed, 0, 0});
        out.ledger.proposer_steps += 1;
        out.ledger.proposer_tokens += step.token_count;
        t.append(std::move(step), 0);
      }
      Verdict v = verifier.score(question, t, seed);
      out.ledger.verifier_calls += 1;
      t.score_history.push_back(v.score);
      if (!v.step_scores.empty()) t.step_scores = std::move(v.step_scores);
      scores.push_back(v.score);
      rollouts.push_back(std::move(t));
    }
  } catch (const BackendError& e) {
    out.error = e.what();
  }
  out.ledger.cycles_executed = 1;
  out.all_candidates = rollouts;
  out.per_cycle_scores.push_back(scores);

  std::vector<Trajectory> ranked = verify_select(rollouts, scores, rollouts.size());
  std::stable_partition(ranked.begin(), ranked.end(),
                        [](const Trajectory& t) { return !t.active(); });
  for (Trajectory& t : ranked) {
    if (t.active() && !out.error) t.status = TrajectoryStatus::Truncated;
  }
  out.final_candidates = std::move(ranked);
  return out;
}

SearchResult dvts(std::uint32_t n, std::uint32_t subtree_width, const SearchConfig& config,
                  const Proposer& proposer, const Verifier& verifier, const Question& question,
                  const SearchOptions& options) {
  if (subtree_width == 0 || n % subtree_width != 0) {
    throw ConfigError("subtree_width",
                      fmt::format("DVTS subtree width {} does not divide n = {}", subtree_width, n));
  }
  SearchConfig sub = config;
  sub.beam_width = beam_width_for(subtree_width, config.branch_factor);
  const std::uint32_t subtrees = n / subtree_width;

  std::vector<SearchResult> parts(subtrees);
  parallel_for(subtrees, options.workers, [&](std::size_t s) {
    SearchOptions sub_options;
    sub_options.root_slot_offset = options.root_slot_offset + s * sub.beam_width;
    parts[s] = vg_search(sub, proposer, verifier, question, sub_options);
  });

  SearchResult out;
  for (auto& part : parts) {
    std::move(part.final_candidates.begin(), part.final_candidates.end(),
              std::back_inserter(out.final_candidates));
    std::move(part.all_candidates.begin(), part.all_candidates.end(),
              std::back_inserter(out.all_candidates));
    std::move(part.per_cycle_scores.begin(), part.per_cycle_scores.end(),
              std::back_inserter(out.per_cycle_scores));
    out.ledger = merge_ledgers(out.ledger, part.ledger);
    if (part.error && !out.error) out.error = part.error;
  }
  return out;
}

}  // namespace vgs
