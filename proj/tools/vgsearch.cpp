// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point: run, sweep, profile-stability, select-g, report.
//
// Exit codes: 0 success, 1 configuration or input error, 2 backend failure,
// 3 invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vgs/adaptive.hpp"
#include "vgs/harness.hpp"

namespace {

constexpr int kConfigExit = 1;
constexpr int kBackendExit = 2;
constexpr int kInvariantExit = 3;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vgs::ConfigError("", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_summary(const vgs::SweepOutput& out) {
  for (const auto& s : out.summary) {
    std::cout << fmt::format("{:<5} g={:<2} n={:<4} acc={:.4f} se={:.4f} log2_flops={:.3f}\n",
                             vgs::to_string(s.strategy), s.g, s.n, s.accuracy, s.stderr_,
                             s.log2_flops);
  }
}

int run_spec(const vgs::ExperimentSpec& spec) {
  const vgs::SweepOutput out = vgs::run_sweep(spec);
  vgs::write_sweep_outputs(out, spec.output_dir);
  print_summary(out);
  std::cerr << "wrote outputs to " << spec.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification-granularity search harness"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one configuration");
  std::string run_config;
  std::optional<std::uint32_t> run_g;
  std::optional<std::uint32_t> run_n;
  std::optional<std::string> run_strategy;
  std::optional<std::string> run_out;
  run->add_option("config", run_config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--g", run_g, "Verification granularity");
  run->add_option("--n", run_n, "Compute budget B1 * B2");
  run->add_option("--strategy", run_strategy, "vg, beam, bon or dvts");
  run->add_option("--out", run_out, "Output directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the full grid of a configuration");
  std::string sweep_config;
  std::optional<std::uint32_t> sweep_workers;
  std::optional<std::string> sweep_out;
  sweep->add_option("config", sweep_config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--workers", sweep_workers, "Worker threads");
  sweep->add_option("--out", sweep_out, "Output directory");

  // profile-stability
  auto* profile = app.add_subcommand("profile-stability", "Distribution of k-step score changes");
  std::string histories_path;
  std::size_t k = 1;
  std::size_t bins = 20;
  profile->add_option("--input", histories_path, "histories.txt from a sweep")
      ->required()
      ->check(CLI::ExistingFile);
  profile->add_option("--k", k, "Step gap")->check(CLI::PositiveNumber);
  profile->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);

  // select-g
  auto* select = app.add_subcommand("select-g", "Pick g from a validation accuracy table");
  std::string table_path;
  std::string g_strategy = "cm";
  std::string difficulty = "all";
  std::uint32_t select_n = 0;
  std::uint32_t g_max = 4;
  double epsilon = 0.0;
  double retention = 0.95;
  select->add_option("--table", table_path, "accuracy.csv (g,difficulty,n,accuracy,samples)")
      ->required()
      ->check(CLI::ExistingFile);
  select->add_option("--strategy", g_strategy, "cm, am or largest")
      ->check(CLI::IsMember({"cm", "am", "largest"}));
  select->add_option("--difficulty", difficulty, "Difficulty bucket");
  select->add_option("--n", select_n, "Compute budget")->required();
  select->add_option("--g-max", g_max, "Largest g considered")->check(CLI::PositiveNumber);
  select->add_option("--epsilon", epsilon, "CM accuracy tolerance")->check(CLI::NonNegativeNumber);
  select->add_option("--retention", retention, "Fraction of g = 1 accuracy for 'largest'")
      ->check(CLI::Range(0.0, 1.0));

  // report
  auto* report = app.add_subcommand("report", "Accuracy vs log2 FLOPs curves from a summary");
  std::string summary_path;
  std::string report_out = ".";
  report->add_option("--summary", summary_path, "summary.csv")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      vgs::ExperimentSpec spec = vgs::load_experiment_spec(run_config);
      if (run_strategy) spec.strategies = {vgs::parse_strategy(*run_strategy)};
      if (run_g) {
        if (*run_g < 1) throw vgs::ConfigError("g", "g must be >= 1");
        spec.g_grid = {*run_g};
      }
      if (run_n) {
        vgs::beam_width_for(*run_n, spec.branch_factor);
        spec.n_grid = {*run_n};
      }
      if (run_out) spec.output_dir = *run_out;
      return run_spec(spec);
    }
    if (*sweep) {
      vgs::ExperimentSpec spec = vgs::load_experiment_spec(sweep_config);
      if (sweep_workers) {
        if (*sweep_workers < 1) throw vgs::ConfigError("workers", "workers must be >= 1");
        spec.workers = *sweep_workers;
      }
      if (sweep_out) spec.output_dir = *sweep_out;
      return run_spec(spec);
    }
    if (*profile) {
      const auto histories = vgs::parse_histories(read_text(histories_path));
      const auto p = vgs::profile_score_stability(histories, k, bins);
      std::cout << fmt::format("pairs={} skipped={} range={} below_1pct={:.4f}\n", p.pairs,
                               p.skipped_histories, p.score_range, p.fraction_below_one_percent);
      std::cout << "bin_lo,bin_hi,count\n";
      for (std::size_t b = 0; b < p.histogram.size(); ++b) {
        std::cout << fmt::format("{},{},{}\n", static_cast<double>(b) / bins,
                                 static_cast<double>(b + 1) / bins, p.histogram[b]);
      }
      return 0;
    }
    if (*select) {
      const vgs::AccuracyTable table = vgs::table_from_csv(read_text(table_path));
      std::uint32_t g = 1;
      if (g_strategy == "largest") {
        g = vgs::largest_effective_g(table, difficulty, select_n, retention, g_max);
      } else if (vgs::parse_g_strategy(g_strategy) == vgs::GStrategy::ComputeMin) {
        g = vgs::cm_g_select(table, difficulty, select_n, epsilon, g_max);
      } else {
        g = vgs::am_g_select(table, difficulty, select_n, g_max);
      }
      std::cout << g << "\n";
      return 0;
    }
    if (*report) {
      const auto files = vgs::report_curves(vgs::csv::read_file(summary_path));
      std::filesystem::create_directories(report_out);
      for (const auto& [name, text] : files) {
        const auto path = (std::filesystem::path(report_out) / name).string();
        vgs::csv::write_file(path, text);
        std::cout << path << "\n";
      }
      return 0;
    }
  } catch (const vgs::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariantExit;
  } catch (const vgs::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackendExit;
  } catch (const vgs::ConfigError& e) {
    std::cerr << "config error";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << ": " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigExit;
  }
  return 0;
}
