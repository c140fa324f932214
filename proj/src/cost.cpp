// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vgs/cost.hpp"

#include <cmath>

namespace vgs {

namespace {

double positive(const char* field, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(field, std::string(field) + " must be a positive finite number");
  }
  return value;
}

}  // namespace

CostParams::CostParams(double solution_length, double tokens_per_step, double proposer_params,
                       double verifier_params, double verifier_alpha)
    : solution_length_(positive("solution_length", solution_length)),
      tokens_per_step_(positive("tokens_per_step", tokens_per_step)),
      proposer_params_(positive("proposer_params", proposer_params)),
      verifier_params_(positive("verifier_params", verifier_params)),
      verifier_alpha_(positive("verifier_alpha", verifier_alpha)) {}

SearchShape shape_of(const SearchConfig& config) {
  return {static_cast<double>(config.g), static_cast<double>(config.beam_width),
          static_cast<double>(config.branch_factor)};
}

double generation_flops(const CostParams& p, const SearchShape& s) {
  const double cycles = p.solution_length() / s.g;
  return 2.0 * p.tokens_per_step() * s.beam_width * (s.g - 1.0 + s.branch_factor) * cycles *
         p.proposer_params();
}

double verification_flops(const CostParams& p, const SearchShape& s) {
  const double cycles = p.solution_length() / s.g;
  return 2.0 * p.verifier_alpha() * s.beam_width * s.branch_factor * cycles *
         p.verifier_params();
}

double total_flops(const CostParams& p, const SearchShape& s) {
  return generation_flops(p, s) + verification_flops(p, s);
}

double normalized_proxy(double g, double beam_width, double branch_factor, double lambda) {
  return (lambda * beam_width * (g - 1.0 + branch_factor) + beam_width * branch_factor) / g;
}

double ledger_to_flops(const CostLedger& ledger, const CostParams& p) {
  return 2.0 * p.proposer_params() * static_cast<double>(ledger.proposer_tokens) +
         2.0 * p.verifier_alpha() * p.verifier_params() *
             static_cast<double>(ledger.verifier_calls);
}

}  // namespace vgs
