/*
 * Copyright 2026 The relaydof Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "relaydof/scheme_distributed.hpp"

using namespace relaydof;

namespace {

ChannelSet ic_channels(std::uint64_t seed, int relays = 3) {
  return draw_realization(Topology::distributed(4, relays), 3, seed);
}

ChannelSet y_channels(std::uint64_t seed) {
  return draw_realization(Topology::distributed(3, 3), 4, seed);
}

}  // namespace

TEST_CASE("pair gains neutralize the cross-pair two-hop rows") {
  for (int t = 0; t < 300; ++t) {
    const ChannelSet cs = ic_channels(Rng::derive(900, t));
    const DistIcGains g = dist_ic_gains(cs);
    CHECK(std::abs(g.v1.frobenius_norm() - 1.0) < 1e-12);
    CHECK(std::abs(g.v2.frobenius_norm() - 1.0) < 1e-12);
    const CMatrix r01 = dist_two_hop_row(cs, 0, 1, 0, 2);
    const CMatrix r10 = dist_two_hop_row(cs, 1, 0, 0, 2);
    const CMatrix r23 = dist_two_hop_row(cs, 2, 3, 1, 2);
    const CMatrix r32 = dist_two_hop_row(cs, 3, 2, 1, 2);
    CHECK(std::abs((r01 * g.v1)(0, 0)) < 1e-9 * r01.frobenius_norm());
    CHECK(std::abs((r10 * g.v1)(0, 0)) < 1e-9 * r10.frobenius_norm());
    CHECK(std::abs((r23 * g.v2)(0, 0)) < 1e-9 * r23.frobenius_norm());
    CHECK(std::abs((r32 * g.v2)(0, 0)) < 1e-9 * r32.frobenius_norm());
  }
}

TEST_CASE("two relays cannot neutralize: stacked conditions are square") {
  const ChannelSet cs = ic_channels(7, 2);
  CHECK_THROWS_AS(dist_ic_gains(cs), EmptyNullSpaceError);
}

TEST_CASE("distributed interference rounds recover exactly, noise off") {
  int rank_ok = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const ChannelSet cs = ic_channels(Rng::derive(910, t));
    Rng rng(Rng::derive(911, t));
    try {
      const RoundResult rr = dist_ic_run_round(cs, 100.0, false, rng);
      REQUIRE(rr.slot_count == 3);
      REQUIRE(rr.symbol_count == 4);
      bool ok = true;
      for (const auto& rep : rr.reports) {
        ok = ok && rep.h_eff_rank == 2;
        REQUIRE(rep.max_desired_error < 1e-8);
        REQUIRE(rep.residual_rel_power < 1e-16);
      }
      if (ok) ++rank_ok;
    } catch (const NumericalError&) {
    }
  }
  CHECK(rank_ok >= 999);
}

TEST_CASE("unintended symbols never reach the observing pair") {
  const ChannelSet cs = ic_channels(15);
  const DistIcGains g = dist_ic_gains(cs);
  // user 0's broadcast-slot coefficient of the symbol sent by user 1
  const CMatrix row = dist_two_hop_row(cs, 0, 1, 0, 2);
  CHECK(std::abs((row * g.v1)(0, 0)) < 1e-9);
  // and user 2's coefficient of the symbol sent by user 3
  const CMatrix row2 = dist_two_hop_row(cs, 2, 3, 1, 2);
  CHECK(std::abs((row2 * g.v2)(0, 0)) < 1e-9);
}

TEST_CASE("relay transmit depends only on the relay's own history") {
  const cxd own[2] = {cxd{1.0, 2.0}, cxd{-0.5, 0.25}};
  const cxd gains[2] = {cxd{0.5, 0.0}, cxd{0.0, 1.0}};
  const cxd a = distributed_relay_transmit({own, 2}, {gains, 2}, 2.0);
  const cxd expect = 2.0 * (gains[0] * own[0] + gains[1] * own[1]);
  CHECK(std::abs(a - expect) < 1e-15);
}

TEST_CASE("three-user assembly: permutations, blocks, joint system") {
  const ChannelSet cs = y_channels(31);
  const DistYAssembly a = dist_y_assemble(cs);

  SECTION("permutation matrices are permutations") {
    for (const auto& p : a.perm) {
      CHECK((p * p.transpose() - CMatrix::identity(6)).max_abs() < 1e-15);
      for (std::size_t i = 0; i < 6; ++i) {
        double rowsum = 0.0, colsum = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
          rowsum += std::abs(p(i, j));
          colsum += std::abs(p(j, i));
        }
        CHECK(rowsum == 1.0);
        CHECK(colsum == 1.0);
      }
    }
  }

  SECTION("desired block of user 0 selects its two incoming columns") {
    // columns of the symbols destined to user 0, sent in slot 0 by 1 and 2
    const CMatrix& up1 = cs.slots[0].uplink[1];
    const CMatrix& up2 = cs.slots[0].uplink[2];
    CHECK((a.a[0].col(0) - up1).max_abs() < 1e-15);
    CHECK((a.a[0].col(1) - up2).max_abs() < 1e-15);
  }

  SECTION("joint system shape and the vectorization identity") {
    CHECK(a.f_bar.rows() == 6);
    CHECK(a.f_bar.cols() == 9);
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
      CMatrix v(3, 3);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) v(i, j) = rng.complex_gaussian();
      for (int j = 0; j < 3; ++j) {
        const CMatrix& down = cs.slots[3].downlink[j];
        const CMatrix lhs = vec(down * v * a.c[j]);
        const CMatrix rhs = kron(a.c[j].transpose(), down) * vec(v);
        CHECK((lhs - rhs).max_abs() < 1e-12);
      }
    }
  }
}

TEST_CASE("joint system: full row rank, generic null dimension, "
          "neutralization residuals") {
  int dim_generic = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const ChannelSet cs = y_channels(Rng::derive(920, t));
    const DistYAssembly a = dist_y_assemble(cs);
    // Monte Carlo rank oracle: 6 rows, 9 unknowns, generically rank 6,
    // so the solution space has dimension 3.
    if (dist_y_nullspace_dim(a.f_bar) == 3) ++dim_generic;
    const CMatrix coding = dist_y_solve(a.f_bar);
    for (double r : dist_y_neutralization_residuals(cs, coding)) {
      CHECK(r < 1e-9);
    }
  }
  CHECK(dim_generic >= 999);
}

TEST_CASE("scaling the coding matrix preserves neutralization") {
  const ChannelSet cs = y_channels(33);
  const DistYAssembly a = dist_y_assemble(cs);
  const CMatrix coding = dist_y_solve(a.f_bar) * cxd{-2.5, 1.5};
  for (double r : dist_y_neutralization_residuals(cs, coding)) {
    CHECK(r < 1e-9);
  }
}

TEST_CASE("three-user distributed rounds: exact recovery, six in four") {
  for (int t = 0; t < 300; ++t) {
    const ChannelSet cs = y_channels(Rng::derive(930, t));
    Rng rng(Rng::derive(931, t));
    const RoundResult rr = dist_y_run_round(cs, 100.0, false, rng);
    CHECK(rr.slot_count == 4);
    CHECK(rr.symbol_count == 6);
    for (const auto& rep : rr.reports) {
      CHECK(rep.max_desired_error < 1e-8);
      CHECK(rep.residual_rel_power < 1e-16);
      CHECK(rep.h_eff_rank == 2);
    }
  }
}

TEST_CASE("rank of the stacked decode systems across many realizations") {
  int ok = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const ChannelSet cs = y_channels(Rng::derive(940, t));
    Rng rng(Rng::derive(941, t));
    try {
      const RoundResult rr = dist_y_run_round(cs, 100.0, false, rng);
      bool all = true;
      for (const auto& rep : rr.reports) all = all && rep.h_eff_rank == 2;
      if (all) ++ok;
    } catch (const NumericalError&) {
    }
  }
  CHECK(ok >= 999);
}

TEST_CASE("every relay respects the power budget; the busiest one meets it") {
  const ChannelSet cs = y_channels(37);
  const double p = 100.0;
  double acc[3] = {0.0, 0.0, 0.0};
  const int n = 3000;
  for (int t = 0; t < n; ++t) {
    Rng rng(Rng::derive(960, t));
    DistDebug dbg;
    dist_y_run_round(cs, p, true, rng, Tolerance{}, nullptr, &dbg);
    for (int r = 0; r < 3; ++r) acc[r] += std::norm(dbg.relay_signal(r, 0));
  }
  double worst = 0.0;
  for (int r = 0; r < 3; ++r) {
    acc[r] /= n;
    CHECK(acc[r] <= p * 1.05);
    worst = std::max(worst, acc[r]);
  }
  CHECK(worst == Catch::Approx(p).epsilon(0.05));
}

TEST_CASE("a silent user leaves a plain two-row stack") {
  const ChannelSet cs = y_channels(35);
  Rng rng(36);
  SymbolMatrix s = draw_symbols(3, dist_y_symbol_order(), rng);
  s.value(1, 0) = cxd{};  // user 0 sent nothing
  s.value(2, 0) = cxd{};
  const RoundResult rr =
      dist_y_run_round(cs, 100.0, false, rng, Tolerance{}, &s);
  for (const auto& rep : rr.reports) CHECK(rep.max_desired_error < 1e-8);
}
