// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "vgs/core.hpp"

namespace vgs {

/// Model-size and workload constants of the FLOPs cost model.
class CostParams {
 public:
  /// All arguments must be strictly positive; throws ConfigError otherwise.
  /// alpha = 1 for discriminative PRMs (one score per evaluation).
  CostParams(double solution_length, double tokens_per_step, double proposer_params,
             double verifier_params, double verifier_alpha = 1.0);

  [[nodiscard]] double solution_length() const { return solution_length_; }  // L
  [[nodiscard]] double tokens_per_step() const { return tokens_per_step_; }  // T
  [[nodiscard]] double proposer_params() const { return proposer_params_; }  // Pg
  [[nodiscard]] double verifier_params() const { return verifier_params_; }  // Pv
  [[nodiscard]] double verifier_alpha() const { return verifier_alpha_; }

  /// Relative cost of generation vs verification, T * Pg / Pv.
  [[nodiscard]] double lambda() const {
    return tokens_per_step_ * proposer_params_ / verifier_params_;
  }

 private:
  double solution_length_;
  double tokens_per_step_;
  double proposer_params_;
  double verifier_params_;
  double verifier_alpha_;
};

/// Shape of one search as the cost model sees it.
struct SearchShape {
  double g = 1;
  double beam_width = 1;
  double branch_factor = 1;
};

SearchShape shape_of(const SearchConfig& config);

/// 2 * T * B1 * (g - 1 + B2) * (L / g) * Pg
double generation_flops(const CostParams& params, const SearchShape& shape);
/// 2 * alpha * B1 * B2 * (L / g) * Pv
double verification_flops(const CostParams& params, const SearchShape& shape);
/// generation_flops + verification_flops
double total_flops(const CostParams& params, const SearchShape& shape);

inline double generation_flops(const CostParams& p, const SearchConfig& c) {
  return generation_flops(p, shape_of(c));
}
inline double verification_flops(const CostParams& p, const SearchConfig& c) {
  return verification_flops(p, shape_of(c));
}
inline double total_flops(const CostParams& p, const SearchConfig& c) {
  return total_flops(p, shape_of(c));
}

/// (lambda * B1 * (g - 1 + B2) + B1 * B2) / g. Proportional to total_flops
/// when alpha = 1: total = 2 * L * Pv * proxy.
double normalized_proxy(double g, double beam_width, double branch_factor, double lambda);

/// FLOPs of the operations a run actually performed:
/// 2 * Pg * proposer_tokens + 2 * alpha * Pv * verifier_calls.
double ledger_to_flops(const CostLedger& ledger, const CostParams& params);

}  // namespace vgs
