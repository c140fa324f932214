// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vgs {

class TableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CellKey {
  std::uint32_t g = 1;
  std::string difficulty;
  std::uint32_t n = 0;

  auto operator<=>(const CellKey&) const = default;
  bool operator==(const CellKey&) const = default;
};

struct Cell {
  double accuracy = 0.0;
  std::uint64_t samples = 0;

  bool operator==(const Cell&) const = default;
};

/// Acc(g, d, n) with the number of runs behind each estimate.
class AccuracyTable {
 public:
  void set(const CellKey& key, Cell cell);

  [[nodiscard]] std::optional<Cell> find(std::uint32_t g, std::string_view difficulty,
                                         std::uint32_t n) const;
  /// Throws TableError when the cell is missing.
  [[nodiscard]] double accuracy(std::uint32_t g, std::string_view difficulty,
                                std::uint32_t n) const;

  [[nodiscard]] const std::map<CellKey, Cell>& entries() const { return entries_; }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

  bool operator==(const AccuracyTable&) const = default;

 private:
  std::map<CellKey, Cell> entries_;
};

/// One graded validation search.
struct ValidationRun {
  std::string question_id;
  std::uint32_t g = 1;
  std::string difficulty;
  std::uint32_t n = 0;
  bool correct = false;
};

/// Per-cell mean correctness. Every (d, n) present must have a g = 1 cell.
AccuracyTable build_accuracy_table(std::span<const ValidationRun> runs);

/// Compute minimization at accuracy parity: the largest g reached by scanning
/// upward from 1 while Acc(g) >= Acc(1) - epsilon. A missing cell ends the scan.
std::uint32_t cm_g_select(const AccuracyTable& table, std::string_view difficulty,
                          std::uint32_t n, double epsilon, std::uint32_t g_max);

/// Accuracy maximization: argmax_g Acc(g) over 1..g_max, ties to the larger g.
std::uint32_t am_g_select(const AccuracyTable& table, std::string_view difficulty,
                          std::uint32_t n, std::uint32_t g_max);

/// Largest g in 1..g_max with Acc(g) >= retention * Acc(1). Not a prefix scan.
std::uint32_t largest_effective_g(const AccuracyTable& table, std::string_view difficulty,
                                  std::uint32_t n, double retention, std::uint32_t g_max);

enum class GStrategy { ComputeMin, AccuracyMax };

GStrategy parse_g_strategy(std::string_view name);

struct ConvergencePoint {
  std::size_t subset_size = 0;
  std::uint32_t selected_g = 1;
  double test_accuracy = 0.0;

  bool operator==(const ConvergencePoint&) const = default;
};

struct ConvergenceRequest {
  std::string difficulty;
  std::uint32_t n = 0;
  std::uint32_t g_max = 4;
  double epsilon = 0.0;  // CM only
  GStrategy strategy = GStrategy::AccuracyMax;
  std::uint64_t seed = 0;
};

/// For each subset size, samples that many validation questions without
/// replacement, tunes g* on them and reports Acc_test(g*). Size 0 is the g = 1
/// baseline.
std::vector<ConvergencePoint> convergence_curve(std::span<const ValidationRun> pool,
                                                std::span<const std::size_t> subset_sizes,
                                                const AccuracyTable& test_table,
                                                const ConvergenceRequest& request);

/// CSV with header g,difficulty,n,accuracy,samples.
std::string to_csv(const AccuracyTable& table);
AccuracyTable table_from_csv(std::string_view text);

}  // namespace vgs
