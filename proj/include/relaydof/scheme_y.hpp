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

#ifndef RELAYDOF_SCHEME_Y_HPP
#define RELAYDOF_SCHEME_Y_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "relaydof/channel.hpp"
#include "relaydof/cmatrix.hpp"
#include "relaydof/scheme_common.hpp"

namespace relaydof {

/// K-user all-to-all exchange through one N-antenna relay: K round-robin
/// multiple-access slots followed by K-2 relay broadcast slots, moving
/// K(K-1) symbols in 2K-2 slots (nominal slope K/2). Requires N >= K-1.
struct YSchemeConfig {
  int users = 3;
  int relay_antennas = 2;
  bool genie_relay = false;
};

inline int y_slot_count(int users) { return 2 * users - 2; }

inline std::vector<std::pair<int, int>> y_message_set(int users) {
  std::vector<std::pair<int, int>> m;
  for (int dest = 0; dest < users; ++dest)
    for (int src = 0; src < users; ++src)
      if (dest != src) m.emplace_back(dest, src);
  return m;
}

/// Slots 0..K-1: everyone but user k talks, user k and the relay listen.
/// Slots K..2K-3: the relay broadcasts to all users.
inline SlotPlan y_build_plan(int users) {
  if (users < 3) throw ConfigError("y_build_plan: need K >= 3");
  SlotPlan plan;
  for (int k = 0; k < users; ++k) {
    Slot s;
    for (int l = 0; l < users; ++l)
      if (l != k) s.sources.push_back(l);
    s.destinations = {k, kRelayNode};
    plan.slots.push_back(std::move(s));
  }
  for (int n = 0; n < users - 2; ++n) {
    Slot s;
    s.sources = {kRelayNode};
    for (int k = 0; k < users; ++k) s.destinations.push_back(k);
    plan.slots.push_back(std::move(s));
  }
  return plan;
}

/// Uplink matrix of the slot in which user `listener` receives: one column
/// per talking user, ascending order.
inline CMatrix y_uplink_matrix(const ChannelSet& channels, int listener) {
  const auto& sc = channels.slots.at(static_cast<std::size_t>(listener));
  std::vector<CMatrix> cols;
  for (int l = 0; l < channels.topology.num_users; ++l)
    if (l != listener) cols.push_back(sc.uplink.at(static_cast<std::size_t>(l)));
  return hstack(cols);
}

/// Broadcast-slot beamforming: the vector carrying the (dest, src) symbol
/// is drawn from the null space of the stacked downlink rows of every
/// other user, so only dest and src can hear it. First null-space basis
/// column, deterministic.
inline PrecoderSet y_build_relay_precoders(const ChannelSet& channels,
                                           int users, int relay_antennas,
                                           int slot,
                                           const Tolerance& tol = Tolerance{}) {
  if (relay_antennas < users - 1) {
    throw ConfigError("y_build_relay_precoders: need N >= K-1");
  }
  const auto& sc = channels.slots.at(static_cast<std::size_t>(slot));
  PrecoderSet p;
  for (int dest = 0; dest < users; ++dest) {
    for (int src = 0; src < users; ++src) {
      if (dest == src) continue;
      std::vector<CMatrix> rows;
      for (int j = 0; j < users; ++j) {
        if (j == dest || j == src) continue;
        rows.push_back(sc.downlink.at(static_cast<std::size_t>(j)));
      }
      const CMatrix basis = null_space(vstack(rows), tol);
      p.by_slot[slot][{dest, src}] = basis.col(0);
    }
  }
  return p;
}

/// Optional introspection of a round, for verification and tests.
struct YDebug {
  std::vector<double> gamma;          // per broadcast slot: power scale
  std::vector<CMatrix> relay_signal;  // per broadcast slot: transmit vector
};

/// Full round: MAC phase, relay ZF + forwarding, broadcast phase, per-user
/// self-interference cancellation and stacked solve. Reports carry the
/// exact aggregate noise covariance for rate evaluation.
inline RoundResult y_run_round(const ChannelSet& channels,
                               const YSchemeConfig& cfg, double p,
                               bool noise_on, Rng& rng,
                               const Tolerance& tol = Tolerance{},
                               const SymbolMatrix* symbols_override = nullptr,
                               YDebug* debug = nullptr) {
  const int users = cfg.users;
  const int antennas = cfg.relay_antennas;
  if (users < 3) throw ConfigError("y_run_round: need K >= 3");
  if (antennas < users - 1) throw ConfigError("y_run_round: need N >= K-1");
  if (channels.topology.num_users != users ||
      channels.topology.relay_dim != antennas ||
      channels.slot_count < y_slot_count(users)) {
    throw ConfigError("y_run_round: channel set does not match scheme");
  }
  const double sqrt_p = std::sqrt(p);
  const SlotPlan plan = y_build_plan(users);
  const SymbolMatrix symbols =
      symbols_override ? *symbols_override
                       : draw_symbols(users, y_message_set(users), rng);

  // MAC phase: user k's own sample, relay estimates, per-slot ZF noise.
  std::vector<cxd> mac_sample(users);
  std::map<std::pair<int, int>, cxd> estimate;
  std::vector<CMatrix> block_cov;           // per slot: cov of sqrt(P)*err
  std::vector<std::vector<int>> block_srcs;  // per slot: talking users
  for (int k = 0; k < users; ++k) {
    std::map<int, CMatrix> tx;
    std::vector<int> srcs;
    for (int l = 0; l < users; ++l) {
      if (l == k) continue;
      tx.emplace(l, CMatrix{{sqrt_p * symbols(k, l)}});
      srcs.push_back(l);
    }
    auto rx = propagate(channels, k, plan.slots[static_cast<std::size_t>(k)],
                        tx, noise_on, rng);
    mac_sample[static_cast<std::size_t>(k)] = rx.at(k)(0, 0);
    const CMatrix uplink = y_uplink_matrix(channels, k);
    if (cfg.genie_relay || !noise_on) {
      for (int l : srcs) estimate[{k, l}] = symbols(k, l);
      block_cov.push_back(CMatrix(static_cast<std::size_t>(users - 1),
                                  static_cast<std::size_t>(users - 1)));
    } else {
      const CMatrix est =
          relay_zf_decode(rx.at(kRelayNode), uplink, sqrt_p, tol);
      for (std::size_t i = 0; i < srcs.size(); ++i) {
        estimate[{k, srcs[static_cast<std::size_t>(i)]}] = est(i, 0);
      }
      block_cov.push_back(zf_noise_cov(uplink, tol));
    }
    block_srcs.push_back(std::move(srcs));
  }

  // Broadcast phase.
  const double base_weight = 1.0 / std::sqrt(double(users) * (users - 1));
  const int relay_slots = users - 2;
  std::vector<PrecoderSet> precoders;
  std::vector<double> gamma(static_cast<std::size_t>(relay_slots));
  std::vector<std::map<int, cxd>> bcast_sample(
      static_cast<std::size_t>(relay_slots));
  for (int t = 0; t < relay_slots; ++t) {
    const int slot = users + t;
    precoders.push_back(
        y_build_relay_precoders(channels, users, antennas, slot, tol));
    std::vector<RelayStream> streams;
    for (const auto& [dest, src] : y_message_set(users)) {
      RelayStream s;
      s.symbol = {dest, src};
      s.beam = precoders.back().at(slot, dest, src);
      s.base_weight = base_weight;
      if (noise_on && !cfg.genie_relay) {
        s.block = dest;
        const auto& srcs = block_srcs[static_cast<std::size_t>(dest)];
        s.index_in_block = static_cast<int>(
            std::find(srcs.begin(), srcs.end(), src) - srcs.begin());
      }
      streams.push_back(std::move(s));
    }
    gamma[static_cast<std::size_t>(t)] =
        1.0 / std::sqrt(relay_power_factor(streams, block_cov, p));
    CMatrix x_r(static_cast<std::size_t>(antennas), 1);
    for (const auto& s : streams) {
      x_r = x_r + s.beam * (sqrt_p * gamma[static_cast<std::size_t>(t)] *
                            s.base_weight * estimate.at(s.symbol));
    }
    auto rx = propagate(channels, slot,
                        plan.slots[static_cast<std::size_t>(slot)],
                        {{kRelayNode, x_r}}, noise_on, rng);
    for (int j = 0; j < users; ++j) {
      bcast_sample[static_cast<std::size_t>(t)][j] = rx.at(j)(0, 0);
    }
    if (debug) {
      debug->gamma.push_back(gamma[static_cast<std::size_t>(t)]);
      debug->relay_signal.push_back(x_r);
    }
  }

  // Per-user decode.
  RoundResult result;
  result.slot_count = y_slot_count(users);
  result.symbol_count = users * (users - 1);
  result.noise_on = noise_on;
  result.genie_relay = cfg.genie_relay;
  const std::size_t rows = static_cast<std::size_t>(users - 1);
  for (int j = 0; j < users; ++j) {
    std::vector<int> partners;
    for (int k = 0; k < users; ++k)
      if (k != j) partners.push_back(k);

    CMatrix h_eff(rows, rows);
    CMatrix obs(rows, 1);
    CMatrix noise_cov(rows, rows);
    const auto& mac = channels.slots[static_cast<std::size_t>(j)].user_user;
    for (std::size_t c = 0; c < partners.size(); ++c) {
      h_eff(0, c) = mac(j, partners[c]);
    }
    obs(0, 0) = mac_sample[static_cast<std::size_t>(j)];
    noise_cov(0, 0) = 1.0;

    // Coefficient rows mapping each MAC block's forwarded ZF noise into
    // the broadcast rows (row 0 carries none).
    std::vector<CMatrix> block_coeff(
        static_cast<std::size_t>(users),
        CMatrix(rows, static_cast<std::size_t>(users - 1)));
    for (int t = 0; t < relay_slots; ++t) {
      const std::size_t r = static_cast<std::size_t>(1 + t);
      const int slot = users + t;
      const CMatrix& down =
          channels.slots[static_cast<std::size_t>(slot)].downlink
              [static_cast<std::size_t>(j)];
      const double scale = gamma[static_cast<std::size_t>(t)] * base_weight;
      cxd self_term{};
      for (const auto& [pair_key, beam] :
           precoders[static_cast<std::size_t>(t)].by_slot.at(slot)) {
        const auto [dest, src] = pair_key;
        const cxd eff = (down * beam)(0, 0) * scale;
        const auto& srcs = block_srcs[static_cast<std::size_t>(dest)];
        const std::size_t idx = static_cast<std::size_t>(
            std::find(srcs.begin(), srcs.end(), src) - srcs.begin());
        block_coeff[static_cast<std::size_t>(dest)](r, idx) = eff;
        if (dest == j) {
          const std::size_t c = static_cast<std::size_t>(
              std::find(partners.begin(), partners.end(), src) -
              partners.begin());
          h_eff(r, c) = eff;
        } else if (src == j) {
          self_term += eff * symbols(dest, src);
        }
      }
      obs(r, 0) =
          bcast_sample[static_cast<std::size_t>(t)].at(j) - sqrt_p * self_term;
      noise_cov(r, r) += 1.0;
    }
    if (noise_on && !cfg.genie_relay) {
      for (int m = 0; m < users; ++m) {
        add_block_cov(noise_cov, block_coeff[static_cast<std::size_t>(m)],
                      block_cov[static_cast<std::size_t>(m)]);
      }
    }

    DecodeReport rep;
    rep.user = j;
    rep.h_eff = h_eff;
    rep.noise_cov = noise_cov;
    for (std::size_t c = 0; c < rows; ++c) rep.desired_cols.push_back(c);
    rep.h_eff_rank = rank(h_eff, tol);
    if (rep.h_eff_rank < rows) {
      throw RankDeficientError("y_run_round: effective matrix rank-deficient");
    }
    const CMatrix sol = solve(h_eff, obs * cxd{1.0 / sqrt_p, 0.0}, tol);
    CMatrix truth(rows, 1);
    for (std::size_t c = 0; c < partners.size(); ++c) {
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

#endif  // RELAYDOF_SCHEME_Y_HPP
