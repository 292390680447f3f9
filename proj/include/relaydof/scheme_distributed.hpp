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

#ifndef RELAYDOF_SCHEME_DISTRIBUTED_HPP
#define RELAYDOF_SCHEME_DISTRIBUTED_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "relaydof/channel.hpp"
#include "relaydof/cmatrix.hpp"
#include "relaydof/scheme_common.hpp"

namespace relaydof {

inline constexpr int kDistRelays = 3;

/// One distributed relay's transmit sample: a gain per own stored
/// observation, then a common power scale. Takes only this relay's own
/// history; relays share the coefficient plan but never their samples.
inline cxd distributed_relay_transmit(std::span<const cxd> own_history,
                                      std::span<const cxd> gains,
                                      double scale) {
  cxd x{};
  for (std::size_t t = 0; t < own_history.size(); ++t) {
    x += gains[t] * own_history[t];
  }
  return x * scale;
}

// ---------------------------------------------------------------------------
// Two-pair exchange, four users, three single-antenna relays, three slots.
// ---------------------------------------------------------------------------

/// Two-hop effective row from source `src` (talking in slot `tx_slot`)
/// through the three relays to user `l` in the broadcast slot: the
/// componentwise product of the relay-to-user row and the source-to-relay
/// column.
inline CMatrix dist_two_hop_row(const ChannelSet& channels, int l, int src,
                                int tx_slot, int bcast_slot) {
  const int relays = channels.topology.relay_dim;
  const CMatrix& down =
      channels.slots[static_cast<std::size_t>(bcast_slot)].downlink
          [static_cast<std::size_t>(l)];
  const CMatrix& up = channels.slots[static_cast<std::size_t>(tx_slot)].uplink
                          [static_cast<std::size_t>(src)];
  CMatrix g(1, static_cast<std::size_t>(relays));
  for (int n = 0; n < relays; ++n) g(0, n) = down(0, n) * up(n, 0);
  return g;
}

struct DistIcGains {
  CMatrix v1;  // gains applied to the first-slot observations, unit norm
  CMatrix v2;  // gains applied to the second-slot observations, unit norm
};

/// Relay gain vectors neutralizing the two-hop path of each symbol at the
/// pair that never observed it. Needs three relays: with two, the stacked
/// condition matrices are square and generically full rank.
inline DistIcGains dist_ic_gains(const ChannelSet& channels,
                                 const Tolerance& tol = Tolerance{}) {
  const CMatrix m1 = vstack({dist_two_hop_row(channels, 0, 1, 0, 2),
                             dist_two_hop_row(channels, 1, 0, 0, 2)});
  const CMatrix m2 = vstack({dist_two_hop_row(channels, 2, 3, 1, 2),
                             dist_two_hop_row(channels, 3, 2, 1, 2)});
  return {null_space(m1, tol).col(0), null_space(m2, tol).col(0)};
}

struct DistDebug {
  double relay_scale = 1.0;
  DistIcGains gains;
  CMatrix coding_matrix;  // relays x slots (the three-user variant)
  CMatrix relay_signal;   // relays x 1 broadcast transmit samples
};

/// Full distributed interference round: forward/backward slots over the
/// direct channels, then each relay forwards a gain-weighted sum of its
/// own two observations. Decoding mirrors the co-located variant.
inline RoundResult dist_ic_run_round(const ChannelSet& channels, double p,
                                     bool noise_on, Rng& rng,
                                     const Tolerance& tol = Tolerance{},
                                     const SymbolMatrix* symbols_override =
                                         nullptr,
                                     DistDebug* debug = nullptr) {
  const int users = 4;
  if (channels.topology.num_users != users ||
      channels.topology.relay_kind != RelayKind::distributed ||
      channels.topology.relay_dim != kDistRelays || channels.slot_count < 3) {
    throw ConfigError("dist_ic_run_round: channel set does not match scheme");
  }
  const int relays = kDistRelays;
  const double sqrt_p = std::sqrt(p);
  const std::vector<std::pair<int, int>> messages{{2, 0}, {3, 1}, {0, 2},
                                                  {1, 3}};
  const SymbolMatrix symbols =
      symbols_override ? *symbols_override : draw_symbols(users, messages, rng);
  SlotPlan plan;
  plan.slots = {Slot{{0, 1}, {2, 3, kRelayNode}},
                Slot{{2, 3}, {0, 1, kRelayNode}},
                Slot{{kRelayNode}, {0, 1, 2, 3}}};

  // Direct phases; every relay stores its own two scalar observations.
  std::vector<std::map<int, cxd>> user_sample(users);
  std::vector<CMatrix> relay_obs;  // per slot: relays x 1
  const std::vector<std::map<int, std::pair<int, int>>> tx_table{
      {{0, {2, 0}}, {1, {3, 1}}}, {{2, {0, 2}}, {3, {1, 3}}}};
  for (std::size_t t = 0; t < tx_table.size(); ++t) {
    std::map<int, CMatrix> tx;
    for (const auto& [src, sym] : tx_table[t]) {
      tx.emplace(src, CMatrix{{sqrt_p * symbols(sym.first, sym.second)}});
    }
    auto rx = propagate(channels, static_cast<int>(t), plan.slots[t], tx,
                        noise_on, rng);
    for (const auto& [node, sig] : rx) {
      if (node != kRelayNode)
        user_sample[static_cast<std::size_t>(node)][static_cast<int>(t)] =
            sig(0, 0);
    }
    relay_obs.push_back(rx.at(kRelayNode));
  }

  const DistIcGains gains = dist_ic_gains(channels, tol);

  // Common scale: homogeneous neutralization only survives one shared
  // scalar, chosen so the busiest relay meets its power budget.
  double worst = 0.0;
  for (int n = 0; n < relays; ++n) {
    const auto& s0 = channels.slots[0];
    const auto& s1 = channels.slots[1];
    const double load0 =
        p * (std::norm(s0.uplink[0](n, 0)) + std::norm(s0.uplink[1](n, 0))) +
        (noise_on ? 1.0 : 0.0);
    const double load1 =
        p * (std::norm(s1.uplink[2](n, 0)) + std::norm(s1.uplink[3](n, 0))) +
        (noise_on ? 1.0 : 0.0);
    worst = std::max(worst, std::norm(gains.v1(n, 0)) * load0 +
                                std::norm(gains.v2(n, 0)) * load1);
  }
  const double beta = std::sqrt(p / worst);

  CMatrix x_r(static_cast<std::size_t>(relays), 1);
  for (int n = 0; n < relays; ++n) {
    const cxd own[2] = {relay_obs[0](n, 0), relay_obs[1](n, 0)};
    const cxd g[2] = {gains.v1(n, 0), gains.v2(n, 0)};
    x_r(n, 0) = distributed_relay_transmit({own, 2}, {g, 2}, beta);
  }
  auto rx = propagate(channels, 2, plan.slots[2], {{kRelayNode, x_r}},
                      noise_on, rng);
  if (debug) {
    debug->relay_scale = beta;
    debug->gains = gains;
    debug->relay_signal = x_r;
  }

  // Decode: same stacked 2x2 shape as the co-located interference round.
  struct UserPlan {
    int direct_slot;
    std::vector<int> col_srcs;  // sources whose symbols form the columns
    std::size_t desired;
    int self_src;
  };
  const std::vector<UserPlan> plans{{1, {2, 3}, 0, 0},
                                    {1, {2, 3}, 1, 1},
                                    {0, {0, 1}, 0, 2},
                                    {0, {0, 1}, 1, 3}};
  const auto sym_of_src = [&](int src) {
    for (const auto& m : messages)
      if (m.second == src) return m;
    throw ConfigError("dist_ic_run_round: bad source");
  };

  RoundResult result;
  result.slot_count = 3;
  result.symbol_count = 4;
  result.noise_on = noise_on;
  for (int j = 0; j < users; ++j) {
    const auto& up = plans[static_cast<std::size_t>(j)];
    CMatrix h_eff(2, 2);
    CMatrix obs(2, 1);
    CMatrix noise_cov(2, 2);
    const auto& uu =
        channels.slots[static_cast<std::size_t>(up.direct_slot)].user_user;
    for (std::size_t c = 0; c < 2; ++c) {
      h_eff(0, c) = uu(j, up.col_srcs[c]);
    }
    obs(0, 0) = user_sample[static_cast<std::size_t>(j)].at(up.direct_slot);
    noise_cov(0, 0) = 1.0;

    auto eff_of_src = [&](int src) {
      const int tx_slot = (src < 2) ? 0 : 1;
      const CMatrix g = dist_two_hop_row(channels, j, src, tx_slot, 2);
      const CMatrix& v = (src < 2) ? gains.v1 : gains.v2;
      return (g * v)(0, 0) * beta;
    };
    for (std::size_t c = 0; c < 2; ++c) {
      h_eff(1, c) = eff_of_src(up.col_srcs[c]);
    }
    const auto self_sym = sym_of_src(up.self_src);
    obs(1, 0) = rx.at(j)(0, 0) -
                sqrt_p * eff_of_src(up.self_src) *
                    symbols(self_sym.first, self_sym.second);
    double fwd = 0.0;
    if (noise_on) {
      const CMatrix& down = channels.slots[2].downlink
                                [static_cast<std::size_t>(j)];
      for (int n = 0; n < relays; ++n) {
        fwd += std::norm(down(0, n)) *
               (std::norm(gains.v1(n, 0)) + std::norm(gains.v2(n, 0)));
      }
    }
    noise_cov(1, 1) = 1.0 + beta * beta * fwd;

    DecodeReport rep;
    rep.user = j;
    rep.h_eff = h_eff;
    rep.noise_cov = noise_cov;
    rep.desired_cols = {up.desired};
    rep.h_eff_rank = rank(h_eff, tol);
    if (rep.h_eff_rank < 2) {
      throw RankDeficientError(
          "dist_ic_run_round: effective matrix rank-deficient");
    }
    const CMatrix sol = solve(h_eff, obs * cxd{1.0 / sqrt_p, 0.0}, tol);
    CMatrix truth(2, 1);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto sym = sym_of_src(up.col_srcs[c]);
      truth(c, 0) = symbols(sym.first, sym.second);
      rep.truth.push_back(truth(c, 0));
      rep.recovered.push_back(sol(c, 0));
    }
    rep.max_desired_error =
        std::abs(sol(up.desired, 0) - truth(up.desired, 0));
    rep.residual_rel_power =
        relative_residual(obs, h_eff * truth * cxd{sqrt_p, 0.0});
    result.reports.push_back(std::move(rep));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Three-user all-to-all exchange with three single-antenna relays.
// ---------------------------------------------------------------------------

inline std::vector<std::pair<int, int>> dist_y_symbol_order() {
  return {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
}

/// Per-user split of the six-symbol stack, plus the joint neutralization
/// system over the vectorized space-time coding matrix. Because each relay
/// forwards only its own observations, the true condition for a symbol
/// sent in slot k and unknown to user j couples the coding matrix's slot-k
/// column with the componentwise two-hop row (relay-to-j) . (src-to-relay):
/// the joint system is block-structured per slot column, not the dense
/// per-user kron stack a fully-cooperating antenna array would give.
struct DistYAssembly {
  CMatrix big;                // relays x 6: uplink columns in symbol order
  std::vector<CMatrix> perm;  // per user: 6x6 permutation
  std::vector<CMatrix> a;     // per user: desired block (relays x 2)
  std::vector<CMatrix> b;     // per user: self block
  std::vector<CMatrix> c;     // per user: unknown-interference block
  std::vector<CMatrix> cond;  // per slot: 2x3 two-hop condition block
  CMatrix f_bar;              // 6x9 joint system acting on vec(coding)
};

inline DistYAssembly dist_y_assemble(const ChannelSet& channels) {
  const int users = 3;
  const int relays = channels.topology.relay_dim;
  const auto order = dist_y_symbol_order();

  std::vector<CMatrix> cols;
  for (const auto& [dest, src] : order) {
    cols.push_back(channels.slots[static_cast<std::size_t>(dest)].uplink
                       [static_cast<std::size_t>(src)]);
  }
  DistYAssembly out;
  out.big = hstack(cols);

  for (int j = 0; j < users; ++j) {
    std::vector<std::size_t> desired, self, other;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& [dest, src] = order[i];
      if (dest == j) {
        desired.push_back(i);
      } else if (src == j) {
        self.push_back(i);
      } else {
        other.push_back(i);
      }
    }
    CMatrix perm(order.size(), order.size());
    std::size_t pos = 0;
    for (auto idx : desired) perm(idx, pos++) = 1.0;
    for (auto idx : self) perm(idx, pos++) = 1.0;
    for (auto idx : other) perm(idx, pos++) = 1.0;
    const CMatrix split = out.big * perm;
    CMatrix aj(static_cast<std::size_t>(relays), 2);
    CMatrix bj(static_cast<std::size_t>(relays), 2);
    CMatrix cj(static_cast<std::size_t>(relays), 2);
    for (int n = 0; n < relays; ++n) {
      for (std::size_t q = 0; q < 2; ++q) {
        aj(n, q) = split(n, q);
        bj(n, q) = split(n, 2 + q);
        cj(n, q) = split(n, 4 + q);
      }
    }
    out.perm.push_back(std::move(perm));
    out.a.push_back(std::move(aj));
    out.b.push_back(std::move(bj));
    out.c.push_back(std::move(cj));
  }

  // One 2x3 block per slot column: each of the slot's two symbols must
  // vanish along its two-hop path to the one user that never observed it.
  CMatrix f_bar(6, 9);
  for (int k = 0; k < users; ++k) {
    std::vector<CMatrix> rows;
    for (int src = 0; src < users; ++src) {
      if (src == k) continue;
      const int third = 3 - k - src;
      rows.push_back(dist_two_hop_row(channels, third, src, k, 3));
    }
    CMatrix block = vstack(rows);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 3; ++c)
        f_bar(static_cast<std::size_t>(2 * k) + r,
              static_cast<std::size_t>(3 * k) + c) = block(r, c);
    out.cond.push_back(std::move(block));
  }
  out.f_bar = f_bar;
  return out;
}

/// Space-time coding matrix: entry (n, k) is relay n's gain on its slot-k
/// observation. Each slot column comes from the null space of that slot's
/// 2x3 condition block (first basis column, deterministic), so no column
/// can degenerate to zero.
inline CMatrix dist_y_solve(const CMatrix& f_bar,
                            const Tolerance& tol = Tolerance{}) {
  CMatrix coding(kDistRelays, kDistRelays);
  for (int k = 0; k < kDistRelays; ++k) {
    CMatrix block(2, kDistRelays);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < kDistRelays; ++c)
        block(r, c) = f_bar(static_cast<std::size_t>(2 * k) + r,
                            static_cast<std::size_t>(3 * k) + c);
    const CMatrix basis = null_space(block, tol);
    coding.set_col(static_cast<std::size_t>(k), basis.col(0));
  }
  return coding;
}

/// Relative leak of each of the six unknown-interference coefficients
/// (one per user/symbol pair), given a coding matrix.
inline std::vector<double> dist_y_neutralization_residuals(
    const ChannelSet& channels, const CMatrix& coding) {
  std::vector<double> out;
  for (const auto& [dest, src] : dist_y_symbol_order()) {
    const int third = 3 - dest - src;
    const CMatrix g = dist_two_hop_row(channels, third, src, dest, 3);
    const CMatrix col = coding.col(static_cast<std::size_t>(dest));
    const double denom = g.frobenius_norm() * col.frobenius_norm();
    out.push_back(std::abs((g * col)(0, 0)) / denom);
  }
  return out;
}

inline std::size_t dist_y_nullspace_dim(const CMatrix& f_bar,
                                        const Tolerance& tol = Tolerance{}) {
  return f_bar.cols() - rank(f_bar, tol);
}

/// Full distributed three-user round: the usual round-robin MAC phase,
/// then one slot in which every relay forwards a coded combination of its
/// own three stored observations.
inline RoundResult dist_y_run_round(const ChannelSet& channels, double p,
                                    bool noise_on, Rng& rng,
                                    const Tolerance& tol = Tolerance{},
                                    const SymbolMatrix* symbols_override =
                                        nullptr,
                                    DistDebug* debug = nullptr) {
  const int users = 3;
  if (channels.topology.num_users != users ||
      channels.topology.relay_kind != RelayKind::distributed ||
      channels.topology.relay_dim != kDistRelays || channels.slot_count < 4) {
    throw ConfigError("dist_y_run_round: channel set does not match scheme");
  }
  const int relays = kDistRelays;
  const double sqrt_p = std::sqrt(p);
  const auto order = dist_y_symbol_order();
  const SymbolMatrix symbols =
      symbols_override ? *symbols_override : draw_symbols(users, order, rng);

  SlotPlan plan;
  for (int k = 0; k < users; ++k) {
    Slot s;
    for (int l = 0; l < users; ++l)
      if (l != k) s.sources.push_back(l);
    s.destinations = {k, kRelayNode};
    plan.slots.push_back(std::move(s));
  }
  plan.slots.push_back(Slot{{kRelayNode}, {0, 1, 2}});

  std::vector<cxd> mac_sample(users);
  std::vector<CMatrix> relay_obs;
  for (int k = 0; k < users; ++k) {
    std::map<int, CMatrix> tx;
    for (int l = 0; l < users; ++l) {
      if (l == k) continue;
      tx.emplace(l, CMatrix{{sqrt_p * symbols(k, l)}});
    }
    auto rx = propagate(channels, k, plan.slots[static_cast<std::size_t>(k)],
                        tx, noise_on, rng);
    mac_sample[static_cast<std::size_t>(k)] = rx.at(k)(0, 0);
    relay_obs.push_back(rx.at(kRelayNode));
  }

  const DistYAssembly assembly = dist_y_assemble(channels);
  const CMatrix coding = dist_y_solve(assembly.f_bar, tol);

  double worst = 0.0;
  for (int n = 0; n < relays; ++n) {
    double load = 0.0;
    for (int k = 0; k < users; ++k) {
      double uplink_power = 0.0;
      for (int l = 0; l < users; ++l) {
        if (l == k) continue;
        uplink_power += std::norm(
            channels.slots[static_cast<std::size_t>(k)].uplink
                [static_cast<std::size_t>(l)](n, 0));
      }
      load += std::norm(coding(n, k)) *
              (p * uplink_power + (noise_on ? 1.0 : 0.0));
    }
    worst = std::max(worst, load);
  }
  const double beta = std::sqrt(p / worst);

  CMatrix x_r(static_cast<std::size_t>(relays), 1);
  for (int n = 0; n < relays; ++n) {
    const cxd own[3] = {relay_obs[0](n, 0), relay_obs[1](n, 0),
                        relay_obs[2](n, 0)};
    const cxd g[3] = {coding(n, 0), coding(n, 1), coding(n, 2)};
    x_r(n, 0) = distributed_relay_transmit({own, 3}, {g, 3}, beta);
  }
  auto rx = propagate(channels, 3, plan.slots[3], {{kRelayNode, x_r}},
                      noise_on, rng);
  if (debug) {
    debug->relay_scale = beta;
    debug->coding_matrix = coding;
    debug->relay_signal = x_r;
  }

  RoundResult result;
  result.slot_count = 4;
  result.symbol_count = 6;
  result.noise_on = noise_on;
  for (int j = 0; j < users; ++j) {
    std::vector<int> partners;
    for (int l = 0; l < users; ++l)
      if (l != j) partners.push_back(l);
    const CMatrix& down = channels.slots[3].downlink
                              [static_cast<std::size_t>(j)];
    // two-hop coefficient of the symbol sent by `src` in slot `slot`
    auto eff = [&](int slot, int src) {
      const CMatrix g = dist_two_hop_row(channels, j, src, slot, 3);
      return (g * coding.col(static_cast<std::size_t>(slot)))(0, 0) * beta;
    };

    CMatrix h_eff(2, 2);
    CMatrix obs(2, 1);
    CMatrix noise_cov(2, 2);
    const auto& uu = channels.slots[static_cast<std::size_t>(j)].user_user;
    for (std::size_t c = 0; c < 2; ++c) {
      h_eff(0, c) = uu(j, partners[c]);
      h_eff(1, c) = eff(j, partners[c]);  // desired: sent to j in slot j
    }
    obs(0, 0) = mac_sample[static_cast<std::size_t>(j)];
    noise_cov(0, 0) = 1.0;
    cxd self_term{};
    for (std::size_t c = 0; c < 2; ++c) {
      // own symbols travelled in the slots of their destinations
      self_term += eff(partners[c], j) * symbols(partners[c], j);
    }
    obs(1, 0) = rx.at(j)(0, 0) - sqrt_p * self_term;
    double fwd = 0.0;
    if (noise_on) {
      for (int n = 0; n < relays; ++n) {
        double gsum = 0.0;
        for (int k = 0; k < users; ++k) gsum += std::norm(coding(n, k));
        fwd += std::norm(down(0, n)) * gsum;
      }
    }
    noise_cov(1, 1) = 1.0 + beta * beta * fwd;

    DecodeReport rep;
    rep.user = j;
    rep.h_eff = h_eff;
    rep.noise_cov = noise_cov;
    rep.desired_cols = {0, 1};
    rep.h_eff_rank = rank(h_eff, tol);
    if (rep.h_eff_rank < 2) {
      throw RankDeficientError(
          "dist_y_run_round: effective matrix rank-deficient");
    }
    const CMatrix sol = solve(h_eff, obs * cxd{1.0 / sqrt_p, 0.0}, tol);
    CMatrix truth(2, 1);
    for (std::size_t c = 0; c < 2; ++c) {
      truth(c, 0) = symbols(j, partners[c]);
      rep.truth.push_back(truth(c, 0));
      rep.recovered.push_back(sol(c, 0));
      rep.max_desired_error =
          std::max(rep.max_desired_error, std::abs(sol(c, 0) - truth(c, 0)));
    }
    rep.residual_rel_power =
        relative_residual(obs, h_eff * truth * cxd{sqrt_p, 0.0});
    result.reports.push_back(std::move(rep));
  }
  return result;
}

}  // namespace relaydof

#endif  // RELAYDOF_SCHEME_DISTRIBUTED_HPP
