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

#include "relaydof/scheme_pairwise.hpp"

using namespace relaydof;

namespace {

const Topology kTopo = Topology::colocated(4, 2);

ChannelSet make_channels(PairwiseVariant v, std::uint64_t seed) {
  return draw_realization(kTopo, pairwise_slot_count(v), seed);
}

}  // namespace

TEST_CASE("plans are half-duplex and carry the right ratios") {
  for (auto v : {PairwiseVariant::ic_nullspace, PairwiseVariant::ic_alignment,
                 PairwiseVariant::ic_af, PairwiseVariant::x_channel}) {
    const SlotPlan plan = pairwise_build_plan(v);
    CHECK_NOTHROW(check_half_duplex(plan));
    CHECK(static_cast<int>(plan.slots.size()) == pairwise_slot_count(v));
    const auto msgs = pairwise_message_set(v);
    if (v == PairwiseVariant::x_channel) {
      CHECK(msgs.size() == 8);
      CHECK(plan.slots.size() == 5);
    } else {
      CHECK(msgs.size() == 4);
      CHECK(plan.slots.size() == 3);
    }
  }
}

TEST_CASE("null-message mask: only active messages are ever carried") {
  for (auto v : {PairwiseVariant::ic_nullspace, PairwiseVariant::ic_alignment,
                 PairwiseVariant::x_channel}) {
    const auto msgs = pairwise_message_set(v);
    const auto tx = detail::pairwise_tx_table(v);
    std::vector<std::pair<int, int>> carried;
    for (const auto& slot : tx) {
      for (const auto& [src, sym] : slot) {
        CHECK(sym.second == src);  // encoder maps own message only
        carried.push_back(sym);
      }
    }
    CHECK(carried.size() == msgs.size());
    for (const auto& sym : msgs) {
      CHECK(std::count(carried.begin(), carried.end(), sym) == 1);
    }
  }
}

TEST_CASE("interference precoders: axis-aligned downlink gives the "
          "complementary axis") {
  ChannelSet cs = make_channels(PairwiseVariant::ic_nullspace, 12);
  cs.slots[2].downlink[0] = CMatrix{{1.0, 0.0}};
  const PrecoderSet p = ic_build_precoders(cs);
  const CMatrix& v = p.at(2, 3, 1);  // the symbol user 0 never observed
  CHECK(std::abs(v(0, 0)) < 1e-12);
  CHECK(std::abs(std::abs(v(1, 0)) - 1.0) < 1e-12);
}

TEST_CASE("interference precoders: orthogonality residuals over draws") {
  for (int t = 0; t < 200; ++t) {
    const ChannelSet cs =
        make_channels(PairwiseVariant::ic_nullspace, Rng::derive(800, t));
    const PrecoderSet p = ic_build_precoders(cs);
    const auto& down = cs.slots[2].downlink;
    const std::vector<std::pair<std::pair<int, int>, int>> nulls{
        {{2, 0}, 1}, {{3, 1}, 0}, {{0, 2}, 3}, {{1, 3}, 2}};
    for (const auto& [sym, user] : nulls) {
      const CMatrix& v = p.at(2, sym.first, sym.second);
      CHECK(std::abs(v.frobenius_norm() - 1.0) < 1e-12);
      CHECK(std::abs((down[user] * v)(0, 0)) <
            1e-9 * down[user].frobenius_norm());
    }
  }
}

TEST_CASE("interference rounds: exact noise-off recovery for all users") {
  int good = 0;
  for (int t = 0; t < 1000; ++t) {
    const ChannelSet cs =
        make_channels(PairwiseVariant::ic_nullspace, Rng::derive(810, t));
    Rng rng(Rng::derive(811, t));
    const PairwiseConfig cfg{PairwiseVariant::ic_nullspace, false};
    try {
      const RoundResult rr = pairwise_run_round(cs, cfg, 100.0, false, rng);
      bool ok = true;
      for (const auto& rep : rr.reports) {
        ok = ok && rep.max_desired_error < 1e-6 && rep.h_eff_rank == 2;
      }
      if (ok) ++good;
    } catch (const NumericalError&) {
    }
  }
  CHECK(good >= 999);
}

TEST_CASE("interference round: zero self symbol reduces to a plain solve") {
  const ChannelSet cs = make_channels(PairwiseVariant::ic_nullspace, 13);
  Rng rng(14);
  SymbolMatrix s = draw_symbols(
      4, pairwise_message_set(PairwiseVariant::ic_nullspace), rng);
  s.value(2, 0) = cxd{};  // user 0 sent nothing
  const PairwiseConfig cfg{PairwiseVariant::ic_nullspace, false};
  const RoundResult rr =
      pairwise_run_round(cs, cfg, 100.0, false, rng, Tolerance{}, &s);
  for (const auto& rep : rr.reports) CHECK(rep.max_desired_error < 1e-8);
}

TEST_CASE("alignment precoders meet the recorded-coefficient targets") {
  for (int t = 0; t < 200; ++t) {
    const ChannelSet cs =
        make_channels(PairwiseVariant::ic_alignment, Rng::derive(820, t));
    const PrecoderSet p = ic_alignment_precoders(cs);
    const auto& down = cs.slots[2].downlink;
    const auto& uu0 = cs.slots[0].user_user;
    const auto& uu1 = cs.slots[1].user_user;
    // symbol (2,0): reproduced at users 1 and 3 as their slot-0 coefficients
    const CMatrix& v20 = p.at(2, 2, 0);
    CHECK(std::abs((down[1] * v20)(0, 0) - uu0(1, 0)) < 1e-10);
    CHECK(std::abs((down[3] * v20)(0, 0) - uu0(3, 0)) < 1e-10);
    const CMatrix& v31 = p.at(2, 3, 1);
    CHECK(std::abs((down[0] * v31)(0, 0) - uu1(0, 1)) < 1e-10);
    CHECK(std::abs((down[2] * v31)(0, 0) - uu1(2, 1)) < 1e-10);
  }
}

TEST_CASE("alignment: all-real channels give a real solution") {
  ChannelSet cs = make_channels(PairwiseVariant::ic_alignment, 15);
  for (auto& sc : cs.slots) {
    for (int k = 0; k < 4; ++k) {
      for (int l = 0; l < 4; ++l)
        if (k != l) sc.user_user(k, l) = cxd{std::abs(sc.user_user(k, l)), 0.0};
      for (int a = 0; a < 2; ++a) {
        sc.uplink[k](a, 0) = cxd{std::abs(sc.uplink[k](a, 0)), 0.0};
        sc.downlink[k](0, a) = cxd{std::abs(sc.downlink[k](0, a)), 0.0};
      }
    }
  }
  const PrecoderSet p = ic_alignment_precoders(cs);
  for (const auto& [sym, v] : p.by_slot.at(2)) {
    (void)sym;
    CHECK(std::abs(v(0, 0).imag()) < 1e-12);
    CHECK(std::abs(v(1, 0).imag()) < 1e-12);
  }
}

TEST_CASE("alignment rounds: the cleaned broadcast sample is a pure scalar "
          "multiple of the desired symbol") {
  const ChannelSet cs = make_channels(PairwiseVariant::ic_alignment, 16);
  Rng rng(17);
  const PairwiseConfig cfg{PairwiseVariant::ic_alignment, false};
  PairwiseDebug dbg;
  const RoundResult rr = pairwise_run_round(cs, cfg, 100.0, false, rng,
                                            Tolerance{}, nullptr, &dbg);
  for (const auto& rep : rr.reports) {
    CHECK(rep.h_eff.rows() == 1);
    CHECK(rep.max_desired_error < 1e-8);
    CHECK(rep.residual_rel_power < 1e-16);
  }
  // the aligned block equals the scaled noise-free recorded sample
  for (int j = 0; j < 4; ++j) {
    const cxd rec = dbg.recorded_sample.at(j);
    const cxd ali = dbg.aligned_value.at(j);
    CHECK(std::abs(ali - dbg.relay_scale * rec) <
          1e-9 * (1.0 + std::abs(ali)));
  }
}

TEST_CASE("amplify-and-forward equals decode-and-forward without noise") {
  for (int t = 0; t < 100; ++t) {
    const ChannelSet cs =
        make_channels(PairwiseVariant::ic_nullspace, Rng::derive(830, t));
    Rng rng(Rng::derive(831, t));
    const SymbolMatrix s = draw_symbols(
        4, pairwise_message_set(PairwiseVariant::ic_nullspace), rng);
    Rng rng_df(0), rng_af(0);
    PairwiseDebug df, af;
    const RoundResult r_df = pairwise_run_round(
        cs, {PairwiseVariant::ic_nullspace, false}, 100.0, false, rng_df,
        Tolerance{}, &s, &df);
    const RoundResult r_af = pairwise_run_round(
        cs, {PairwiseVariant::ic_af, false}, 100.0, false, rng_af,
        Tolerance{}, &s, &af);
    CHECK((df.relay_signal - af.relay_signal).max_abs() < 1e-9);
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(r_df.reports[j].recovered[0] -
                     r_af.reports[j].recovered[0]) < 1e-8);
    }
  }
}

TEST_CASE("amplify-and-forward: zero observation, zero transmit") {
  const ChannelSet cs = make_channels(PairwiseVariant::ic_af, 19);
  const std::vector<CMatrix> zeros{CMatrix(2, 1), CMatrix(2, 1)};
  std::vector<CMatrix> uplinks{
      hstack({cs.slots[0].uplink[0], cs.slots[0].uplink[1]}),
      hstack({cs.slots[1].uplink[2], cs.slots[1].uplink[3]})};
  const PrecoderSet p = ic_build_precoders(cs);
  std::vector<std::vector<CMatrix>> beams{{p.at(2, 2, 0), p.at(2, 3, 1)},
                                          {p.at(2, 0, 2), p.at(2, 1, 3)}};
  const CMatrix x = ic_af_transmit(zeros, uplinks, beams, 0.5);
  CHECK(x.max_abs() == 0.0);
}

TEST_CASE("cross-exchange precoders: the sixteen scalar conditions") {
  for (int t = 0; t < 200; ++t) {
    const ChannelSet cs =
        make_channels(PairwiseVariant::x_channel, Rng::derive(840, t));
    const PrecoderSet p = x_build_precoders(cs);
    const auto& down = cs.slots[4].downlink;
    struct Cond {
      std::pair<int, int> sym;
      int null_user, align_user, tx_slot;
    };
    const std::vector<Cond> conds{
        {{2, 0}, 1, 3, 0}, {{2, 1}, 0, 3, 0}, {{3, 0}, 1, 2, 1},
        {{3, 1}, 0, 2, 1}, {{0, 2}, 3, 1, 2}, {{0, 3}, 2, 1, 2},
        {{1, 2}, 3, 0, 3}, {{1, 3}, 2, 0, 3}};
    for (const auto& c : conds) {
      const CMatrix& v = p.at(4, c.sym.first, c.sym.second);
      const double ref = down[c.null_user].frobenius_norm();
      CHECK(std::abs((down[c.null_user] * v)(0, 0)) < 1e-10 * ref);
      const cxd target =
          cs.slots[c.tx_slot].user_user(c.align_user, c.sym.second);
      CHECK(std::abs((down[c.align_user] * v)(0, 0) - target) <
            1e-10 * (1.0 + std::abs(target)));
    }
  }
}

TEST_CASE("cross-exchange precoders: identity downlink rows give the "
          "stacked target directly") {
  ChannelSet cs = make_channels(PairwiseVariant::x_channel, 21);
  cs.slots[4].downlink[1] = CMatrix{{1.0, 0.0}};  // null row of (2,0)
  cs.slots[4].downlink[3] = CMatrix{{0.0, 1.0}};  // align row of (2,0)
  const PrecoderSet p = x_build_precoders(cs);
  const CMatrix& v = p.at(4, 2, 0);
  const cxd target = cs.slots[0].user_user(3, 0);
  CHECK(std::abs(v(0, 0)) < 1e-12);
  CHECK(std::abs(v(1, 0) - target) < 1e-12);
}

TEST_CASE("cross-exchange rounds: all eight symbols recovered, aligned "
          "shape matches the recorded sample") {
  int shape_ok = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const ChannelSet cs =
        make_channels(PairwiseVariant::x_channel, Rng::derive(850, t));
    Rng rng(Rng::derive(851, t));
    const PairwiseConfig cfg{PairwiseVariant::x_channel, false};
    PairwiseDebug dbg;
    const RoundResult rr = pairwise_run_round(cs, cfg, 100.0, false, rng,
                                              Tolerance{}, nullptr, &dbg);
    int recovered = 0;
    for (const auto& rep : rr.reports) {
      REQUIRE(rep.max_desired_error < 1e-8);
      recovered += static_cast<int>(rep.desired_cols.size());
    }
    REQUIRE(recovered == 8);
    bool ok = true;
    for (int j = 0; j < 4; ++j) {
      const cxd rec = dbg.recorded_sample.at(j);
      const cxd ali = dbg.aligned_value.at(j);
      ok = ok && std::abs(ali - dbg.relay_scale * rec) <=
                     1e-9 * (1.0 + std::abs(ali));
    }
    if (ok) ++shape_ok;
  }
  CHECK(shape_ok == trials);
}

TEST_CASE("cross-exchange: unknown-interference isolation at the broadcast") {
  const ChannelSet cs = make_channels(PairwiseVariant::x_channel, 23);
  const PrecoderSet p = x_build_precoders(cs);
  const auto& down = cs.slots[4].downlink;
  const auto plans = detail::pairwise_user_plans(PairwiseVariant::x_channel);
  const auto msgs = pairwise_message_set(PairwiseVariant::x_channel);
  for (int j = 0; j < 4; ++j) {
    const auto& up = plans[j];
    for (const auto& sym : msgs) {
      const bool known =
          std::count(up.cols.begin(), up.cols.end(), sym) ||
          std::count(up.self_syms.begin(), up.self_syms.end(), sym) ||
          std::count(up.aligned_syms.begin(), up.aligned_syms.end(), sym);
      if (known) continue;
      const CMatrix& v = p.at(4, sym.first, sym.second);
      CHECK(std::abs((down[j] * v)(0, 0)) <
            1e-9 * down[j].frobenius_norm() * (1.0 + v.frobenius_norm()));
    }
  }
}

TEST_CASE("broadcast power meets the budget for unit and targeted beams") {
  const double p = 100.0;
  for (auto v : {PairwiseVariant::ic_nullspace, PairwiseVariant::x_channel}) {
    const ChannelSet cs = make_channels(v, 27);
    double acc = 0.0;
    const int n = 2000;
    for (int t = 0; t < n; ++t) {
      Rng rng(Rng::derive(870, t));
      PairwiseDebug dbg;
      pairwise_run_round(cs, {v, false}, p, true, rng, Tolerance{}, nullptr,
                         &dbg);
      const double fn = dbg.relay_signal.frobenius_norm();
      acc += fn * fn;
    }
    CHECK(acc / n == Catch::Approx(p).epsilon(0.05));
  }
}

TEST_CASE("cross-exchange: recorded-subtraction noise variance matches the "
          "covariance model") {
  // Fixed realization, genie relay isolates receiver noise: the cleaned
  // broadcast row should carry variance 1 + alpha^2.
  const ChannelSet cs = make_channels(PairwiseVariant::x_channel, 25);
  const PairwiseConfig cfg{PairwiseVariant::x_channel, true};
  const double p = 100.0;
  double acc = 0.0;
  double alpha = 0.0;
  double model = 0.0;
  const int n = 4000;
  for (int t = 0; t < n; ++t) {
    Rng rng(Rng::derive(860, t));
    PairwiseDebug dbg;
    const RoundResult rr = pairwise_run_round(cs, cfg, p, true, rng,
                                              Tolerance{}, nullptr, &dbg);
    const auto& rep = rr.reports[0];
    // residual noise in the broadcast row after removing the signal part
    const std::size_t r = 1;
    cxd expl{};
    cxd obs{};
    for (std::size_t c = 0; c < rep.truth.size(); ++c) {
      expl += rep.h_eff(r, c) * rep.truth[c];
      obs += rep.h_eff(r, c) * rep.recovered[c];
    }
    acc += std::norm(std::sqrt(p) * (obs - expl));
    alpha = dbg.relay_scale;
    model = rep.noise_cov(r, r).real();
  }
  const double empirical = acc / n;
  CHECK(model == Catch::Approx(1.0 + alpha * alpha).epsilon(1e-9));
  CHECK(empirical == Catch::Approx(model).epsilon(0.05));
}
