// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "vgs/cost.hpp"
#include "vgs/search.hpp"

using namespace vgs;

namespace {

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

SearchConfig shape(std::uint32_t g, std::uint32_t b1, std::uint32_t b2) {
  SearchConfig c;
  c.g = g;
  c.beam_width = b1;
  c.branch_factor = b2;
  return c;
}

}  // namespace

TEST_CASE("generation and verification FLOPs by hand") {
  const CostParams unit(1, 1, 1, 1, 1);
  CHECK(generation_flops(unit, shape(1, 1, 1)) == 2.0);
  CHECK(verification_flops(unit, shape(1, 1, 1)) == 2.0);
  CHECK(total_flops(unit, shape(1, 1, 1)) == 4.0);

  const CostParams paper(12, 100, 7e9, 1.5e9, 1);
  // 2 * 100 * 16 * 6 * 4 * 7e9
  CHECK(rel_close(generation_flops(paper, shape(3, 16, 4)), 5.376e14, 1e-12));
  CHECK(rel_close(verification_flops(paper, shape(3, 16, 4)), 7.68e11, 1e-12));

  const CostParams doubled(12, 100, 14e9, 1.5e9, 1);
  CHECK(generation_flops(doubled, shape(3, 16, 4)) ==
        doctest::Approx(2.0 * generation_flops(paper, shape(3, 16, 4))));
  CHECK(verification_flops(paper, shape(2, 16, 4)) ==
        doctest::Approx(2.0 * verification_flops(paper, shape(4, 16, 4))));
}

TEST_CASE("cost parameters must be positive") {
  CHECK_THROWS_AS(CostParams(0, 1, 1, 1), ConfigError);
  CHECK_THROWS_AS(CostParams(1, -1, 1, 1), ConfigError);
  CHECK_THROWS_AS(CostParams(1, 1, 1, 1, 0), ConfigError);
  CHECK_THROWS_AS(CostParams(1, 1, std::nan(""), 1), ConfigError);
  CHECK(CostParams(4, 50, 7e9, 1.5e9).lambda() == 50 * 7e9 / 1.5e9);
}

TEST_CASE("normalized proxy hand values") {
  CHECK(normalized_proxy(1, 16, 4, 10) == 704.0);
  CHECK(normalized_proxy(2, 16, 4, 10) == 432.0);
  CHECK(normalized_proxy(4, 16, 4, 10) == 296.0);
}

TEST_CASE("total FLOPs identities over random parameters") {
  testing::Gen gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const CostParams p(gen.uniform(1, 64), gen.uniform(1, 500), gen.uniform(1e8, 7e10),
                       gen.uniform(1e8, 7e10), 1.0);
    const SearchShape s{static_cast<double>(gen.between(1, 16)),
                        static_cast<double>(gen.between(1, 64)),
                        static_cast<double>(gen.between(1, 16))};
    const double total = total_flops(p, s);
    CHECK(rel_close(total, generation_flops(p, s) + verification_flops(p, s), 1e-12));
    const double proxy = normalized_proxy(s.g, s.beam_width, s.branch_factor, p.lambda());
    CHECK(rel_close(total, 2.0 * p.solution_length() * p.verifier_params() * proxy, 1e-12));
    // Closed form 2 B1 (L/g) [T (g-1+B2) Pg + alpha B2 Pv].
    const double closed = 2.0 * s.beam_width * (p.solution_length() / s.g) *
                          (p.tokens_per_step() * (s.g - 1 + s.branch_factor) * p.proposer_params() +
                           s.branch_factor * p.verifier_params());
    CHECK(rel_close(total, closed, 1e-12));
  }
}

TEST_CASE("proxy decreases in g when B2 >= 2 and lambda >= 1") {
  for (double lambda : {1.0, 10.0, 100.0}) {
    for (int b2 = 2; b2 <= 16; ++b2) {
      for (int b1 : {1, 4, 16}) {
        for (int g = 1; g < 64; ++g) {
          CHECK(normalized_proxy(g + 1, b1, b2, lambda) < normalized_proxy(g, b1, b2, lambda));
        }
      }
    }
  }
}

TEST_CASE("ledger FLOPs") {
  const CostParams unit(1, 1, 1, 1, 1);
  CHECK(ledger_to_flops(CostLedger{}, unit) == 0.0);
  CHECK(ledger_to_flops(CostLedger{0, 100, 2, 0}, unit) == 204.0);
  CHECK(ledger_to_flops(CostLedger{0, 100, 2, 0}, CostParams(1, 1, 1, 1, 3)) == 212.0);
}

TEST_CASE("ledger FLOPs equal the formula on fixed-length runs") {
  const std::uint32_t width = 5;
  const std::uint32_t length = 12;
  for (std::uint32_t g : {1u, 2u, 3u, 4u, 6u}) {
    for (std::uint32_t b1 : {1u, 2u, 4u}) {
      for (std::uint32_t b2 : {1u, 2u, 4u}) {
        SearchConfig c = shape(g, b1, b2);
        c.max_cycles = length / g;
        const auto r = vg_search(c, ScriptedProposer(ScriptedTree{width, length, length, 0.0}),
                                 ScriptedVerifier(), {"f", "", ""});
        CHECK(r.ledger.cycles_executed * g == length);
        const CostParams p(length, width, 7e9, 1.5e9, 1.0);
        CHECK(rel_close(ledger_to_flops(r.ledger, p), total_flops(p, c), 1e-9));
      }
    }
  }
}
