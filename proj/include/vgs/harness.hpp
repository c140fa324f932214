// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vgs/adaptive.hpp"
#include "vgs/aggregate.hpp"
#include "vgs/backends.hpp"
#include "vgs/cost.hpp"
#include "vgs/csv.hpp"
#include "vgs/remote.hpp"
#include "vgs/search.hpp"

namespace vgs {

/// Raised when a run breaks one of the search/ledger invariants.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Strategy { VgSearch, BeamSearch, BestOfN, Dvts };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);

struct LevelSpec {
  std::string name = "all";
  double step_success_p = 0.8;
  std::uint32_t solution_length = 4;
};

struct TaskSpec {
  enum class Kind { Bernoulli, Imt, Scripted, Dataset } kind = Kind::Bernoulli;
  std::uint32_t questions = 50;
  // Bernoulli
  std::vector<LevelSpec> levels = {LevelSpec{}};
  std::uint32_t label_count = 10;
  // IMT
  std::uint32_t alphabet_size = 2;
  std::uint32_t target_length = 6;
  // Scripted
  ScriptedTree scripted;
  // Dataset: JSON lines {"id", "question", "answer", "difficulty"?}
  std::string dataset_path;
};

struct VerifierSpec {
  enum class Kind { Oracle, Noisy, Flip, Ensemble, Remote } kind = Kind::Oracle;
  double flip_probability = 0.3;
  std::vector<VerifierSpec> members;  // Ensemble
  EndpointConfig endpoint;            // Remote
};

struct ProposerSpec {
  enum class Kind { Synthetic, Remote } kind = Kind::Synthetic;
  EndpointConfig endpoint;
};

struct ExperimentSpec {
  std::uint64_t seed = 0;
  std::uint32_t repetitions = 1;
  std::uint32_t workers = 1;
  std::string output_dir = "out";
  std::vector<Strategy> strategies = {Strategy::VgSearch};
  std::vector<std::uint32_t> g_grid = {1, 2, 3, 4};
  std::vector<std::uint32_t> n_grid = {4, 16};
  // Cycles per g; g absent from the map gets ceil(cycle_budget / g).
  std::map<std::uint32_t, std::uint32_t> cycles;
  std::uint32_t cycle_budget = 12;
  std::uint32_t branch_factor = 4;
  std::string step_delimiter = "\n\n";
  std::uint32_t max_tokens_per_step = 2048;
  double reject_below = 0.0;
  std::uint32_t bon_max_steps = 12;
  std::optional<std::uint32_t> dvts_subtree_width;
  AggregationPolicy aggregation = AggregationPolicy::Majority;
  TaskSpec task;
  ProposerSpec proposer;
  VerifierSpec verifier;
  // Unset fields are derived from the task.
  std::optional<double> solution_length;
  std::optional<double> tokens_per_step;
  double proposer_params = 7e9;
  double verifier_params = 1.5e9;
  double verifier_alpha = 1.0;

  /// I for a given g.
  [[nodiscard]] std::uint32_t cycles_for(std::uint32_t g) const;
};

/// Parses and validates a JSON experiment description. Throws ConfigError.
ExperimentSpec parse_experiment_spec(const nlohmann::json& doc);
ExperimentSpec load_experiment_spec(const std::string& path);

/// Questions, backends and cost constants instantiated from an ExperimentSpec.
struct Workload {
  std::vector<Question> questions;
  std::shared_ptr<const Proposer> proposer;
  std::shared_ptr<const Verifier> verifier;
  AnswerExtractor extract;
  CostParams cost;
};

Workload build_workload(const ExperimentSpec& spec);

inline constexpr std::string_view kSweepHeader =
    "strategy,g,n,B1,B2,I,repetition,question_id,correct,proposer_steps,proposer_tokens,"
    "verifier_calls,ledger_flops,formula_flops,selected_answer";
inline constexpr std::string_view kSummaryHeader =
    "strategy,g,n,accuracy,stderr,mean_ledger_flops,mean_formula_flops,log2_flops";

struct SweepRow {
  Strategy strategy = Strategy::VgSearch;
  std::uint32_t g = 1;
  std::uint32_t n = 1;
  std::uint32_t beam_width = 1;
  std::uint32_t branch_factor = 1;
  std::uint32_t cycles = 1;
  std::uint32_t repetition = 0;
  std::string question_id;
  std::string difficulty;
  bool correct = false;
  CostLedger ledger;
  double ledger_flops = 0.0;
  double formula_flops = 0.0;
  std::string selected_answer;
};

struct SummaryRow {
  Strategy strategy = Strategy::VgSearch;
  std::uint32_t g = 1;
  std::uint32_t n = 1;
  double accuracy = 0.0;
  double stderr_ = 0.0;
  double mean_ledger_flops = 0.0;
  double mean_formula_flops = 0.0;
  double log2_flops = 0.0;
};

struct SweepOutput {
  std::vector<SweepRow> rows;        // canonical grid order
  std::vector<SummaryRow> summary;   // one per (strategy, g, n, repetition)
  // Score histories of final candidates, for stability profiling.
  std::vector<std::vector<double>> histories;
};

/// Runs every (strategy, g, n, repetition, question) job. Output is a pure
/// function of the ExperimentSpec; the worker count only changes wall time.
SweepOutput run_sweep(const ExperimentSpec& spec);

std::string sweep_csv(const SweepOutput& out);
std::string summary_csv(const SweepOutput& out);
std::string histories_text(const SweepOutput& out);

/// Acc(g, d, n) over the VG-Search rows, pooled across repetitions. When
/// questions carry difficulty levels, every level is also pooled under "all".
/// Empty when the sweep has no VG-Search rows at g = 1.
AccuracyTable accuracy_table(const SweepOutput& out);

/// Writes sweep.csv, summary.csv, histories.txt and, when available,
/// accuracy.csv into output_dir.
void write_sweep_outputs(const SweepOutput& out, const std::string& output_dir);

/// sqrt(p (1 - p) / m)
double binomial_stderr(double p, std::size_t m);

struct StabilityProfile {
  std::size_t pairs = 0;
  std::size_t skipped_histories = 0;
  double score_range = 0.0;
  double fraction_below_one_percent = 0.0;
  std::vector<std::size_t> histogram;  // equal-width bins over [0, 1]
  std::vector<double> deltas;          // |s[i+k] - s[i]| / range
};

/// Distribution of k-step score changes, normalized by the observed score
/// range. Histories shorter than k + 1 are skipped and counted.
StabilityProfile profile_score_stability(std::span<const std::vector<double>> histories,
                                         std::size_t k, std::size_t bins = 20);

std::vector<std::vector<double>> parse_histories(std::string_view text);

/// Accuracy-vs-log2(FLOPs) series per strategy from a summary table. Returns
/// file name -> CSV contents. Throws csv::CsvError on bad input.
std::map<std::string, std::string> report_curves(const csv::Table& summary);

}  // namespace vgs
