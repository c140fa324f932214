// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vgs/adaptive.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <fmt/format.h>

#include "vgs/csv.hpp"
#include "vgs/seed.hpp"

namespace vgs {

void AccuracyTable::set(const CellKey& key, Cell cell) {
  if (!(cell.accuracy >= 0.0 && cell.accuracy <= 1.0)) {
    throw TableError(fmt::format("accuracy {} outside [0, 1]", cell.accuracy));
  }
  if (key.g < 1) throw TableError("g must be >= 1");
  entries_[key] = cell;
}

std::optional<Cell> AccuracyTable::find(std::uint32_t g, std::string_view difficulty,
                                        std::uint32_t n) const {
  const auto it = entries_.find(CellKey{g, std::string(difficulty), n});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double AccuracyTable::accuracy(std::uint32_t g, std::string_view difficulty,
                               std::uint32_t n) const {
  const auto cell = find(g, difficulty, n);
  if (!cell) {
    throw TableError(fmt::format("no accuracy for g={} difficulty={} n={}", g, difficulty, n));
  }
  return cell->accuracy;
}

AccuracyTable build_accuracy_table(std::span<const ValidationRun> runs) {
  std::map<CellKey, std::pair<std::uint64_t, std::uint64_t>> tally;  // (correct, total)
  std::set<std::pair<std::string, std::uint32_t>> slices;
  for (const auto& r : runs) {
    auto& t = tally[CellKey{r.g, r.difficulty, r.n}];
    t.first += r.correct ? 1 : 0;
    t.second += 1;
    slices.emplace(r.difficulty, r.n);
  }
  for (const auto& [d, n] : slices) {
    if (!tally.contains(CellKey{1, d, n})) {
      throw TableError(fmt::format("missing g=1 baseline for difficulty={} n={}", d, n));
    }
  }
  AccuracyTable table;
  for (const auto& [key, t] : tally) {
    table.set(key, Cell{static_cast<double>(t.first) / static_cast<double>(t.second), t.second});
  }
  return table;
}

std::uint32_t cm_g_select(const AccuracyTable& table, std::string_view difficulty,
                          std::uint32_t n, double epsilon, std::uint32_t g_max) {
  const double floor = table.accuracy(1, difficulty, n) - epsilon;
  std::uint32_t best = 1;
  for (std::uint32_t g = 2; g <= g_max; ++g) {
    const auto cell = table.find(g, difficulty, n);
    if (!cell || cell->accuracy < floor) break;
    best = g;
  }
  return best;
}

std::uint32_t am_g_select(const AccuracyTable& table, std::string_view difficulty,
                          std::uint32_t n, std::uint32_t g_max) {
  std::uint32_t best = 1;
  double best_acc = table.accuracy(1, difficulty, n);
  for (std::uint32_t g = 2; g <= g_max; ++g) {
    const double acc = table.accuracy(g, difficulty, n);
    if (acc >= best_acc) {
      best = g;
      best_acc = acc;
    }
  }
  return best;
}

std::uint32_t largest_effective_g(const AccuracyTable& table, std::string_view difficulty,
                                  std::uint32_t n, double retention, std::uint32_t g_max) {
  const double threshold = retention * table.accuracy(1, difficulty, n);
  std::uint32_t best = 1;
  for (std::uint32_t g = 2; g <= g_max; ++g) {
    if (table.accuracy(g, difficulty, n) >= threshold) best = g;
  }
  return best;
}

GStrategy parse_g_strategy(std::string_view name) {
  if (name == "cm" || name == "CM") return GStrategy::ComputeMin;
  if (name == "am" || name == "AM") return GStrategy::AccuracyMax;
  throw std::invalid_argument(fmt::format("unknown g strategy '{}'", name));
}

std::vector<ConvergencePoint> convergence_curve(std::span<const ValidationRun> pool,
                                                std::span<const std::size_t> subset_sizes,
                                                const AccuracyTable& test_table,
                                                const ConvergenceRequest& request) {
  std::map<std::string, std::vector<const ValidationRun*>> by_question;
  for (const auto& r : pool) by_question[r.question_id].push_back(&r);
  std::vector<const std::vector<const ValidationRun*>*> questions;
  for (const auto& [id, runs] : by_question) questions.push_back(&runs);

  std::vector<ConvergencePoint> curve;
  for (std::size_t size : subset_sizes) {
    if (size > questions.size()) {
      throw std::invalid_argument(fmt::format("subset size {} exceeds pool of {} questions",
                                              size, questions.size()));
    }
    ConvergencePoint point{size, 1, 0.0};
    if (size > 0) {
      // Partial Fisher-Yates over a sorted question list.
      std::vector<std::size_t> order(questions.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::mt19937_64 engine(seed::derive({request.seed, size}));
      for (std::size_t i = 0; i < size; ++i) {
        const std::size_t j = i + seed::below(engine, order.size() - i);
        std::swap(order[i], order[j]);
      }
      std::vector<ValidationRun> subset;
      for (std::size_t i = 0; i < size; ++i) {
        for (const ValidationRun* r : *questions[order[i]]) subset.push_back(*r);
      }
      const AccuracyTable table = build_accuracy_table(subset);
      point.selected_g =
          request.strategy == GStrategy::ComputeMin
              ? cm_g_select(table, request.difficulty, request.n, request.epsilon, request.g_max)
              : am_g_select(table, request.difficulty, request.n, request.g_max);
    }
    point.test_accuracy = test_table.accuracy(point.selected_g, request.difficulty, request.n);
    curve.push_back(point);
  }
  return curve;
}

std::string to_csv(const AccuracyTable& table) {
  std::string out = "g,difficulty,n,accuracy,samples\n";
  for (const auto& [key, cell] : table.entries()) {
    out += csv::join_row({std::to_string(key.g), key.difficulty, std::to_string(key.n),
                          csv::format_double(cell.accuracy), std::to_string(cell.samples)});
  }
  return out;
}

AccuracyTable table_from_csv(std::string_view text) {
  const csv::Table parsed = csv::parse(text);
  const std::size_t g_col = parsed.column("g");
  const std::size_t d_col = parsed.column("difficulty");
  const std::size_t n_col = parsed.column("n");
  const std::size_t a_col = parsed.column("accuracy");
  const std::size_t s_col = parsed.column("samples");
  AccuracyTable table;
  for (const auto& row : parsed.rows) {
    const auto g = csv::to_int(row[g_col]);
    const auto n = csv::to_int(row[n_col]);
    const auto samples = csv::to_int(row[s_col]);
    if (g < 1 || n < 0 || samples < 1) throw TableError("invalid g, n or samples in table CSV");
    table.set(CellKey{static_cast<std::uint32_t>(g), row[d_col], static_cast<std::uint32_t>(n)},
              Cell{csv::to_double(row[a_col]), static_cast<std::uint64_t>(samples)});
  }
  return table;
}

}  // namespace vgs
