// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "adaptive_cases.hpp"
#include "oracles.hpp"
#include "vgs/cost.hpp"
#include "vgs/csv.hpp"
#include "vgs/harness.hpp"
#include "vgs/search.hpp"
#include "vgs/seed.hpp"

using namespace vgs;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

std::string dump(const SearchResult& r) {
  std::string out;
  const auto trajectories = [&](const std::vector<Trajectory>& ts) {
    for (const auto& t : ts) {
      out += fmt::format("{}|{}|{}|{}|", t.prompt_id, t.lineage, to_string(t.status),
                         t.joined_text("\x1f"));
      for (double s : t.score_history) out += csv::format_double(s) + ",";
      out += "|";
      for (double s : t.step_scores) out += csv::format_double(s) + ",";
      out += "\n";
    }
  };
  trajectories(r.final_candidates);
  out += "--\n";
  trajectories(r.all_candidates);
  out += fmt::format("{} {} {} {}\n", r.ledger.proposer_steps, r.ledger.proposer_tokens,
                     r.ledger.verifier_calls, r.ledger.cycles_executed);
  return out;
}

Outcome reduction_equivalences() {
  testing::Gen gen(0xA1);
  int beam_tasks = 0;
  int bon_tasks = 0;
  for (int task = 0; task < 60; ++task) {
    const ScriptedTree tree = testing::random_tree(gen);
    const ScriptedProposer p(tree);
    const ScriptedVerifier v;

    SearchConfig c;
    c.g = 1;
    c.beam_width = static_cast<std::uint32_t>(gen.between(1, 4));
    c.branch_factor = static_cast<std::uint32_t>(gen.between(1, 4));
    c.max_cycles = static_cast<std::uint32_t>(gen.between(1, 8));
    c.seed = gen.below(1ULL << 40);
    const Question q{"eq" + std::to_string(task), "", ""};
    const auto fast = vg_search(c, p, v, q, SearchOptions{4, 0});
    const auto ref = reference_beam_search(c, p, v, q);
    if (!(fast == ref) || dump(fast) != dump(ref)) {
      return {false, fmt::format("g=1 differs from reference beam search on task {}", task)};
    }
    ++beam_tasks;

    const auto n = static_cast<std::uint32_t>(gen.between(1, 12));
    SearchConfig b;
    b.g = tree.max_depth + static_cast<std::uint32_t>(gen.below(3));
    b.beam_width = n;
    b.branch_factor = 1;
    b.max_cycles = 1;
    b.seed = c.seed;
    const auto vg = vg_search(b, p, v, q);
    const auto bon = best_of_n(n, p, v, q, b.g, b.seed);
    if (!(vg == bon) || dump(vg) != dump(bon)) {
      return {false, fmt::format("g>=L differs from best-of-{} on task {}", n, task)};
    }
    ++bon_tasks;
  }
  return {true, fmt::format("{} beam tasks, {} best-of-n tasks identical", beam_tasks, bon_tasks)};
}

Outcome exact_cost_counts() {
  int configs = 0;
  for (std::uint32_t g = 1; g <= 4; ++g) {
    for (std::uint32_t b1 : {1u, 2u, 4u, 16u}) {
      for (std::uint32_t b2 : {1u, 2u, 4u}) {
        for (std::uint32_t cycles = 1; cycles <= 6; ++cycles) {
          SearchConfig c;
          c.g = g;
          c.beam_width = b1;
          c.branch_factor = b2;
          c.max_cycles = cycles;
          c.seed = configs;
          const auto r = vg_search(c, ScriptedProposer(ScriptedTree{2, 64, 64, 0.0}),
                                   ScriptedVerifier(), {"cost", "", ""});
          const std::uint64_t steps = std::uint64_t{b1} * (g - 1 + b2) * cycles;
          const std::uint64_t calls = std::uint64_t{b1} * b2 * cycles;
          if (r.ledger.proposer_steps != steps || r.ledger.verifier_calls != calls) {
            return {false, fmt::format("g={} B1={} B2={} I={}: steps {} (want {}), calls {} (want {})",
                                       g, b1, b2, cycles, r.ledger.proposer_steps, steps,
                                       r.ledger.verifier_calls, calls)};
          }
          ++configs;
        }
      }
    }
  }
  return {true, fmt::format("{} configurations exact", configs)};
}

Outcome cost_identities() {
  testing::Gen gen(0xA3);
  for (int trial = 0; trial < 1000; ++trial) {
    const CostParams p(gen.uniform(1, 64), gen.uniform(1, 500), gen.uniform(1e8, 7e10),
                       gen.uniform(1e8, 7e10), 1.0);
    const SearchShape s{static_cast<double>(gen.between(1, 16)),
                        static_cast<double>(gen.between(1, 64)),
                        static_cast<double>(gen.between(1, 16))};
    const double total = total_flops(p, s);
    if (!rel_close(total, generation_flops(p, s) + verification_flops(p, s), 1e-12)) {
      return {false, fmt::format("draw {}: total != generation + verification", trial)};
    }
    const double proxy = normalized_proxy(s.g, s.beam_width, s.branch_factor, p.lambda());
    if (!rel_close(total, 2.0 * p.solution_length() * p.verifier_params() * proxy, 1e-12)) {
      return {false, fmt::format("draw {}: total != 2 L Pv proxy", trial)};
    }
  }
  const double p1 = normalized_proxy(1, 16, 4, 10);
  const double p2 = normalized_proxy(2, 16, 4, 10);
  const double p4 = normalized_proxy(4, 16, 4, 10);
  const bool spot = p1 == 704.0 && p2 == 432.0 && p4 == 296.0;
  return {spot, fmt::format("1000 draws within 1e-12; proxy g=1,2,4 -> {}, {}, {}", p1, p2, p4)};
}

Outcome imt_scaling() {
  const int segments = 20000;
  std::string detail;
  bool pass = true;
  for (std::uint32_t g = 1; g <= 3; ++g) {
    const double p_exact = std::pow(2.0, -static_cast<double>(g));
    const auto attempt = [&](std::uint64_t trial, std::uint64_t k) {
      const ImtTask task{2, imt_random_target(2, g, seed::derive({0xA4, g, trial}))};
      Trajectory t = Trajectory::root("imt", 0);
      for (std::uint32_t step = 0; step < g; ++step) {
        t.append(imt_propose(task, t, seed::derive({0xA4B, g, trial, k, step})), 0);
      }
      return t.joined_text("") == task.target;
    };

    int hits = 0;
    for (int i = 0; i < segments; ++i) hits += attempt(i, 0) ? 1 : 0;
    const double rate = static_cast<double>(hits) / segments;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < segments; ++i) {
      std::uint64_t k = 0;
      while (!attempt(segments + i, k)) ++k;
      const double a = static_cast<double>(k + 1);
      sum += a;
      sum_sq += a * a;
    }
    const double mean = sum / segments;
    const double var = (sum_sq - segments * mean * mean) / (segments - 1);
    const double se = std::sqrt(var / segments);
    const double expected = std::pow(2.0, g);
    const bool ok = std::abs(rate - p_exact) <= 0.01 && std::abs(mean - expected) <= 3.0 * se;
    pass = pass && ok;
    detail += fmt::format("{}g={}: p={:.4f} (2^-g={:.4f}), attempts={:.3f}+-{:.3f} (2^g={})",
                          detail.empty() ? "" : "; ", g, rate, p_exact, mean, se, expected);
  }
  return {pass, detail};
}

Outcome pruning_efficiency() {
  const int runs = 2000;
  struct Shape {
    std::uint32_t b1, b2;
  };
  const std::vector<Shape> shapes = {{8, 1}, {2, 4}};
  std::vector<double> vg_steps(shapes.size(), 0.0);
  std::vector<int> vg_success(shapes.size(), 0);
  double bon_steps = 0.0;
  int bon_success = 0;
  const auto solved = [](const SearchResult& r, const std::string& target) {
    for (const auto& t : r.final_candidates) {
      if (t.status == TrajectoryStatus::Completed && t.joined_text("") == target) return true;
    }
    return false;
  };
  const ImtProposer proposer(2);
  const ImtVerifier verifier(2);
  for (int i = 0; i < runs; ++i) {
    const Question q{"prune" + std::to_string(i), "", imt_random_target(2, 6, seed::derive({0xA5, static_cast<std::uint64_t>(i)}))};
    const auto bon = best_of_n(8, proposer, verifier, q, 6, i);
    bon_steps += static_cast<double>(bon.ledger.proposer_steps);
    bon_success += solved(bon, q.answer) ? 1 : 0;
    for (std::size_t s = 0; s < shapes.size(); ++s) {
      SearchConfig c;
      c.g = 1;
      c.beam_width = shapes[s].b1;
      c.branch_factor = shapes[s].b2;
      c.max_cycles = 6;
      c.seed = i;
      c.reject_below = 0.5;
      const auto r = vg_search(c, proposer, verifier, q);
      vg_steps[s] += static_cast<double>(r.ledger.proposer_steps);
      vg_success[s] += solved(r, q.answer) ? 1 : 0;
    }
  }
  bool pass = true;
  std::string detail = fmt::format("best-of-8: steps={:.2f} success={:.4f}", bon_steps / runs,
                                   static_cast<double>(bon_success) / runs);
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    pass = pass && vg_steps[s] < bon_steps && vg_success[s] >= bon_success;
    detail += fmt::format("; g=1 B1={} B2={}: steps={:.2f} success={:.4f}", shapes[s].b1,
                          shapes[s].b2, vg_steps[s] / runs,
                          static_cast<double>(vg_success[s]) / runs);
  }
  return {pass, detail};
}

Outcome noisy_verifier_sanity() {
  const std::size_t m = 2000;
  json doc = {{"seed", 6},
              {"strategies", {"vg"}},
              {"grid", {{"g", {1}}, {"n", {16}}, {"cycle_budget", 4}}},
              {"search", {{"branch_factor", 4}}},
              {"aggregation", std::string(to_string(AggregationPolicy::BestFinal))},
              {"task", {{"kind", "bernoulli"}, {"questions", m}, {"p", 0.8}, {"length", 4}}},
              {"verifier", {{"kind", "oracle"}}}};
  const double acc_oracle = run_sweep(parse_experiment_spec(doc)).summary.at(0).accuracy;
  doc["verifier"]["kind"] = "noisy";
  const double acc_noisy = run_sweep(parse_experiment_spec(doc)).summary.at(0).accuracy;

  // Uniformly random choice of a final candidate: its path is correct iff all
  // four of its steps are.
  std::mt19937_64 rng(seed::derive({0xA6}));
  std::bernoulli_distribution step(0.8);
  std::size_t random_hits = 0;
  for (std::size_t i = 0; i < m; ++i) {
    bool ok = true;
    for (int s = 0; s < 4; ++s) ok = step(rng) && ok;
    random_hits += ok ? 1 : 0;
  }
  const double acc_random = static_cast<double>(random_hits) / static_cast<double>(m);

  const double se_o = binomial_stderr(acc_oracle, m);
  const double se_n = binomial_stderr(acc_noisy, m);
  const double se_r = binomial_stderr(acc_random, m);
  const double z = (acc_oracle - acc_noisy) / std::sqrt(se_o * se_o + se_n * se_n);
  const double band = 2.0 * std::sqrt(se_n * se_n + se_r * se_r);
  const bool below = z > 2.3263478740408408;  // one-sided 0.01
  const bool random_like = std::abs(acc_noisy - acc_random) <= band;
  return {below && random_like,
          fmt::format("oracle={:.4f} noisy={:.4f} z={:.2f}; random-selection={:.4f}, |diff|={:.4f} "
                      "(band {:.4f})",
                      acc_oracle, acc_noisy, z, acc_random, std::abs(acc_noisy - acc_random), band)};
}

Outcome adaptive_selectors() {
  const auto cases = testing::selector_cases();
  for (const auto& c : cases) {
    const auto got = testing::run_selector(c);
    if (got != c.expected) {
      return {false, fmt::format("case '{}' selected {} (want {})", c.name, got, c.expected)};
    }
  }
  if (cases.size() < 20) return {false, "fewer than 20 hand-traced tables"};

  const std::vector<double> acc = {0.5, 0.6, 0.85, 0.55};
  AccuracyTable test;
  for (std::uint32_t g = 1; g <= 4; ++g) test.set(CellKey{g, "all", 16}, Cell{acc[g - 1], 1000});
  const std::vector<std::size_t> baseline = {0};
  const std::vector<std::size_t> fifty = {50};
  int hits = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    const auto pool = testing::constructed_pool(0xA7 + rep, 200, acc);
    for (auto strategy : {GStrategy::AccuracyMax, GStrategy::ComputeMin}) {
      const ConvergenceRequest req{"all", 16, 4, 0.0, strategy, rep};
      const auto zero = convergence_curve(pool, baseline, test, req).at(0);
      if (zero.selected_g != 1 || zero.test_accuracy != test.accuracy(1, "all", 16)) {
        return {false, fmt::format("size 0 gave g={} acc={} on rep {}", zero.selected_g,
                                   zero.test_accuracy, rep)};
      }
    }
    const ConvergenceRequest req{"all", 16, 4, 0.0, GStrategy::AccuracyMax, rep};
    hits += convergence_curve(pool, fifty, test, req).at(0).selected_g == 3 ? 1 : 0;
  }
  return {hits >= 190, fmt::format("{} hand tables; size 0 = baseline; size 50 chose g=3 in {}/200",
                                   cases.size(), hits)};
}

Outcome aggregation_oracles() {
  testing::Gen gen(0xA8);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto answers = testing::random_answers(gen);
    mismatches += majority_vote(answers) == testing::counting_oracle(answers) ? 0 : 1;
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const auto answers = testing::random_answers(gen);
    std::vector<double> w(answers.size());
    for (auto& x : w) x = static_cast<double>(gen.below(5)) / 4.0;
    mismatches += weighted_vote(answers, w) == testing::summing_oracle(answers, w) ? 0 : 1;
    const std::vector<double> uniform(answers.size(), gen.coin(0.1) ? 0.0 : gen.unit());
    mismatches += weighted_vote(answers, uniform) == majority_vote(answers) ? 0 : 1;
  }
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Trajectory> pool(gen.between(1, 10));
    std::vector<std::vector<double>> histories;
    for (auto& t : pool) {
      std::vector<double> h(gen.between(1, 5));
      for (auto& s : h) s = static_cast<double>(gen.below(5)) / 4.0;
      t = Trajectory::root("agg", histories.size());
      t.score_history = h;
      histories.push_back(h);
    }
    mismatches += best_score_select(pool, ScoreMode::Final) == testing::best_final_oracle(histories) ? 0 : 1;
    mismatches += best_score_select(pool, ScoreMode::Cumulative) ==
                          testing::best_cumulative_oracle(histories)
                      ? 0
                      : 1;
  }
  return {mismatches == 0, fmt::format("{} mismatches over 1000 inputs per check", mismatches)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome end_to_end_determinism() {
  json doc = json::parse(R"({
    "seed": 9, "repetitions": 2,
    "strategies": ["vg", "beam", "bon", "dvts"],
    "grid": {"g": [1, 2, 3, 4], "n": [4, 16], "cycle_budget": 12},
    "search": {"branch_factor": 4, "max_steps": 12},
    "task": {"kind": "bernoulli", "questions": 60, "labels": 10,
             "levels": [{"name": "easy", "p": 0.9, "length": 4},
                        {"name": "hard", "p": 0.6, "length": 8}]},
    "verifier": {"kind": "flip", "q": 0.3}
  })");
  const auto root = std::filesystem::temp_directory_path() / "vgs_acceptance_determinism";
  std::filesystem::remove_all(root);
  const std::vector<std::pair<std::string, int>> runs = {{"a", 1}, {"b", 1}, {"c", 8}};
  for (const auto& [name, workers] : runs) {
    doc["workers"] = workers;
    write_sweep_outputs(run_sweep(parse_experiment_spec(doc)), (root / name).string());
  }
  std::size_t bytes = 0;
  for (const char* file : {"sweep.csv", "summary.csv", "histories.txt", "accuracy.csv"}) {
    const std::string a = slurp(root / "a" / file);
    if (a.empty() || a != slurp(root / "b" / file) || a != slurp(root / "c" / file)) {
      return {false, fmt::format("{} differs between runs", file)};
    }
    bytes += a.size();
  }
  std::filesystem::remove_all(root);
  return {true, fmt::format("4 files, {} bytes identical across 2 runs and 1 vs 8 workers", bytes)};
}

Outcome granularity_witness() {
  const json doc = json::parse(R"({
    "seed": 1, "workers": 8,
    "strategies": ["vg"],
    "grid": {"g": [1, 2, 3, 4], "n": [4, 16], "cycle_budget": 12},
    "search": {"branch_factor": 4},
    "aggregation": "majority",
    "task": {"kind": "bernoulli", "questions": 600, "p": 0.95, "length": 4, "labels": 10},
    "verifier": {"kind": "flip", "q": 0.3}
  })");
  const auto out = run_sweep(parse_experiment_spec(doc));
  std::vector<std::string> witnesses;
  for (const auto& base : out.summary) {
    if (base.g != 1) continue;
    for (const auto& s : out.summary) {
      if (s.n != base.n || s.g <= 1) continue;
      if (s.accuracy >= base.accuracy && s.mean_ledger_flops <= base.mean_ledger_flops) {
        witnesses.push_back(fmt::format("g={} n={} acc={:.4f} log2F={:.2f} vs g=1 acc={:.4f} "
                                        "log2F={:.2f}",
                                        s.g, s.n, s.accuracy, s.log2_flops, base.accuracy,
                                        base.log2_flops));
      }
    }
  }
  if (witnesses.empty()) return {false, "no g > 1 matches g = 1 accuracy at equal or lower FLOPs"};
  std::string detail = fmt::format("{} witness(es): ", witnesses.size());
  for (std::size_t i = 0; i < witnesses.size(); ++i) detail += (i ? "; " : "") + witnesses[i];
  return {true, detail};
}

struct Criterion {
  int id;
  const char* name;
  double max_seconds;  // 0 = no bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "reduction equivalences", 10, reduction_equivalences},
      {2, "exact cost counts", 5, exact_cost_counts},
      {3, "cost-model identities", 0, cost_identities},
      {4, "IMT segment scaling", 30, imt_scaling},
      {5, "pruning efficiency", 0, pruning_efficiency},
      {6, "noisy-verifier sanity", 0, noisy_verifier_sanity},
      {7, "adaptive selectors", 0, adaptive_selectors},
      {8, "aggregation oracles", 0, aggregation_oracles},
      {9, "end-to-end determinism", 0, end_to_end_determinism},
      {10, "granularity witness on BernoulliTree", 300, granularity_witness},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.max_seconds > 0 && secs >= c.max_seconds) {
      o.pass = false;
      o.detail += fmt::format(" [over the {:.0f} s limit]", c.max_seconds);
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %2d %-38s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
