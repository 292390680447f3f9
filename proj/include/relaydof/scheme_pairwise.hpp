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

#ifndef RELAYDOF_SCHEME_PAIRWISE_HPP
#define RELAYDOF_SCHEME_PAIRWISE_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "relaydof/channel.hpp"
#include "relaydof/cmatrix.hpp"
#include "relaydof/scheme_common.hpp"

namespace relaydof {

/// Four single-antenna users around one two-antenna relay. Users 0 and 2
/// form one exchange pair, users 1 and 3 the other. The interference
/// channel variants move 4 symbols in 3 slots; the cross-exchange variant
/// moves 8 symbols in 5 slots.
enum class PairwiseVariant { ic_nullspace, ic_alignment, ic_af, x_channel };

struct PairwiseConfig {
  PairwiseVariant variant = PairwiseVariant::ic_nullspace;
  bool genie_relay = false;
};

inline constexpr int kPairwiseUsers = 4;
inline constexpr int kPairwiseAntennas = 2;

inline int pairwise_slot_count(PairwiseVariant v) {
  return v == PairwiseVariant::x_channel ? 5 : 3;
}

/// Active (dest, src) messages; everything else is a null message.
inline std::vector<std::pair<int, int>> pairwise_message_set(
    PairwiseVariant v) {
  if (v == PairwiseVariant::x_channel) {
    return {{2, 0}, {2, 1}, {3, 0}, {3, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}};
  }
  return {{2, 0}, {3, 1}, {0, 2}, {1, 3}};
}

inline SlotPlan pairwise_build_plan(PairwiseVariant v) {
  SlotPlan plan;
  auto slot = [](std::vector<int> s, std::vector<int> d) {
    return Slot{std::move(s), std::move(d)};
  };
  const std::vector<int> all{0, 1, 2, 3};
  switch (v) {
    case PairwiseVariant::ic_nullspace:
    case PairwiseVariant::ic_af:
      plan.slots = {slot({0, 1}, {2, 3, kRelayNode}),
                    slot({2, 3}, {0, 1, kRelayNode}),
                    slot({kRelayNode}, all)};
      break;
    case PairwiseVariant::ic_alignment:
      plan.slots = {slot({0, 2}, {1, 3, kRelayNode}),
                    slot({1, 3}, {0, 2, kRelayNode}),
                    slot({kRelayNode}, all)};
      break;
    case PairwiseVariant::x_channel:
      plan.slots = {slot({0, 1}, {2, 3, kRelayNode}),
                    slot({0, 1}, {2, 3, kRelayNode}),
                    slot({2, 3}, {0, 1, kRelayNode}),
                    slot({2, 3}, {0, 1, kRelayNode}),
                    slot({kRelayNode}, all)};
      break;
  }
  return plan;
}

namespace detail {

/// Who transmits which symbol in each pre-broadcast slot.
inline std::vector<std::map<int, std::pair<int, int>>> pairwise_tx_table(
    PairwiseVariant v) {
  switch (v) {
    case PairwiseVariant::ic_nullspace:
    case PairwiseVariant::ic_af:
      return {{{0, {2, 0}}, {1, {3, 1}}}, {{2, {0, 2}}, {3, {1, 3}}}};
    case PairwiseVariant::ic_alignment:
      return {{{0, {2, 0}}, {2, {0, 2}}}, {{1, {3, 1}}, {3, {1, 3}}}};
    case PairwiseVariant::x_channel:
      return {{{0, {2, 0}}, {1, {2, 1}}},
              {{0, {3, 0}}, {1, {3, 1}}},
              {{2, {0, 2}}, {3, {0, 3}}},
              {{2, {1, 2}}, {3, {1, 3}}}};
  }
  return {};
}

/// Per-user decoding layout: which slot supplies the direct equation,
/// which symbols the stacked system solves for, which of those are the
/// user's own messages, which symbols it cancels from memory, and which
/// recorded slot it subtracts (scaled) from the broadcast sample.
struct PairwiseUserPlan {
  std::optional<int> direct_slot;
  std::vector<std::pair<int, int>> cols;
  std::vector<std::size_t> desired;
  std::vector<std::pair<int, int>> self_syms;
  std::optional<int> recorded_slot;
  std::vector<std::pair<int, int>> aligned_syms;
};

inline std::vector<PairwiseUserPlan> pairwise_user_plans(PairwiseVariant v) {
  using P = std::pair<int, int>;
  std::vector<PairwiseUserPlan> u(4);
  switch (v) {
    case PairwiseVariant::ic_nullspace:
    case PairwiseVariant::ic_af:
      u[0] = {1, {P{0, 2}, P{1, 3}}, {0}, {P{2, 0}}, std::nullopt, {}};
      u[1] = {1, {P{0, 2}, P{1, 3}}, {1}, {P{3, 1}}, std::nullopt, {}};
      u[2] = {0, {P{2, 0}, P{3, 1}}, {0}, {P{0, 2}}, std::nullopt, {}};
      u[3] = {0, {P{2, 0}, P{3, 1}}, {1}, {P{1, 3}}, std::nullopt, {}};
      break;
    case PairwiseVariant::ic_alignment:
      u[0] = {std::nullopt, {P{0, 2}}, {0}, {P{2, 0}}, 1, {P{3, 1}, P{1, 3}}};
      u[1] = {std::nullopt, {P{1, 3}}, {0}, {P{3, 1}}, 0, {P{2, 0}, P{0, 2}}};
      u[2] = {std::nullopt, {P{2, 0}}, {0}, {P{0, 2}}, 1, {P{3, 1}, P{1, 3}}};
      u[3] = {std::nullopt, {P{3, 1}}, {0}, {P{1, 3}}, 0, {P{2, 0}, P{0, 2}}};
      break;
    case PairwiseVariant::x_channel:
      u[0] = {2, {P{0, 2}, P{0, 3}}, {0, 1}, {P{2, 0}, P{3, 0}}, 3,
              {P{1, 2}, P{1, 3}}};
      u[1] = {3, {P{1, 2}, P{1, 3}}, {0, 1}, {P{2, 1}, P{3, 1}}, 2,
              {P{0, 2}, P{0, 3}}};
      u[2] = {0, {P{2, 0}, P{2, 1}}, {0, 1}, {P{0, 2}, P{1, 2}}, 1,
              {P{3, 0}, P{3, 1}}};
      u[3] = {1, {P{3, 0}, P{3, 1}}, {0, 1}, {P{0, 3}, P{1, 3}}, 0,
              {P{2, 0}, P{2, 1}}};
      break;
  }
  return u;
}

}  // namespace detail

/// Interference-channel broadcast precoders: the vector carrying each
/// symbol is orthogonal to the downlink row of the one user that never
/// observed that symbol (its pair-mate talked in the same slot).
/// Unit-norm, deterministic.
inline PrecoderSet ic_build_precoders(const ChannelSet& channels,
                                      const Tolerance& tol = Tolerance{}) {
  const int slot = 2;
  const auto& down = channels.slots.at(slot).downlink;
  // (dest, src) -> user whose downlink row must be nulled
  const std::vector<std::pair<std::pair<int, int>, int>> nulls{
      {{2, 0}, 1}, {{3, 1}, 0}, {{0, 2}, 3}, {{1, 3}, 2}};
  PrecoderSet p;
  for (const auto& [sym, user] : nulls) {
    const CMatrix basis =
        null_space(down.at(static_cast<std::size_t>(user)), tol);
    p.by_slot[slot][sym] = basis.col(0);
  }
  return p;
}

/// Alignment-variant broadcast precoders: each symbol's vector reproduces,
/// at both users that overheard it, exactly the direct-channel coefficient
/// they recorded, so one subtraction removes two interference symbols.
inline PrecoderSet ic_alignment_precoders(const ChannelSet& channels,
                                          const Tolerance& tol = Tolerance{}) {
  const int slot = 2;
  const auto& down = channels.slots.at(slot).downlink;
  struct Cond {
    std::pair<int, int> sym;
    int row_a, row_b;   // overhearing users
    int tx_slot;        // slot in which they recorded the symbol
  };
  const std::vector<Cond> conds{
      {{2, 0}, 1, 3, 0}, {{0, 2}, 1, 3, 0}, {{3, 1}, 0, 2, 1},
      {{1, 3}, 0, 2, 1}};
  PrecoderSet p;
  for (const auto& c : conds) {
    const CMatrix m = vstack({down.at(static_cast<std::size_t>(c.row_a)),
                              down.at(static_cast<std::size_t>(c.row_b))});
    const auto& uu = channels.slots.at(static_cast<std::size_t>(c.tx_slot))
                         .user_user;
    const CMatrix rhs{{uu(c.row_a, c.sym.second)}, {uu(c.row_b, c.sym.second)}};
    p.by_slot[slot][c.sym] = solve(m, rhs, tol);
  }
  return p;
}

/// Cross-exchange broadcast precoders: each symbol's vector is nulled at
/// the one user with no knowledge of it and reproduces the recorded
/// direct-channel coefficient at the user that overheard it.
inline PrecoderSet x_build_precoders(const ChannelSet& channels,
                                     const Tolerance& tol = Tolerance{}) {
  const int slot = 4;
  const auto& down = channels.slots.at(slot).downlink;
  struct Cond {
    std::pair<int, int> sym;
    int null_user;
    int align_user;
    int tx_slot;
  };
  const std::vector<Cond> conds{
      {{2, 0}, 1, 3, 0}, {{2, 1}, 0, 3, 0}, {{3, 0}, 1, 2, 1},
      {{3, 1}, 0, 2, 1}, {{0, 2}, 3, 1, 2}, {{0, 3}, 2, 1, 2},
      {{1, 2}, 3, 0, 3}, {{1, 3}, 2, 0, 3}};
  PrecoderSet p;
  for (const auto& c : conds) {
    const CMatrix m =
        vstack({down.at(static_cast<std::size_t>(c.null_user)),
                down.at(static_cast<std::size_t>(c.align_user))});
    const auto& uu = channels.slots.at(static_cast<std::size_t>(c.tx_slot))
                         .user_user;
    const CMatrix rhs{{cxd{}}, {uu(c.align_user, c.sym.second)}};
    p.by_slot[slot][c.sym] = solve(m, rhs, tol);
  }
  return p;
}

inline PrecoderSet pairwise_build_precoders(const ChannelSet& channels,
                                            PairwiseVariant v,
                                            const Tolerance& tol = Tolerance{}) {
  switch (v) {
    case PairwiseVariant::ic_nullspace:
    case PairwiseVariant::ic_af:
      return ic_build_precoders(channels, tol);
    case PairwiseVariant::ic_alignment:
      return ic_alignment_precoders(channels, tol);
    case PairwiseVariant::x_channel:
      return x_build_precoders(channels, tol);
  }
  throw ConfigError("pairwise_build_precoders: unknown variant");
}

/// Amplify-and-forward relay signal: per pre-broadcast slot, the stored
/// observation is passed through the slot's ZF matrix and through the
/// corresponding beamforming block. Identical to decode-and-forward with
/// forwarded estimates, but computed directly from the received samples.
inline CMatrix ic_af_transmit(const std::vector<CMatrix>& relay_rx,
                              const std::vector<CMatrix>& uplinks,
                              const std::vector<std::vector<CMatrix>>& beams,
                              double scale,
                              const Tolerance& tol = Tolerance{}) {
  CMatrix x(relay_rx.front().rows(), 1);
  for (std::size_t t = 0; t < relay_rx.size(); ++t) {
    const CMatrix u = inverse(uplinks[t], tol);  // spatial ZF matrix
    const CMatrix est = u * relay_rx[t];
    const CMatrix beam_block = hstack(beams[t]);
    x = x + beam_block * est * cxd{scale, 0.0};
  }
  return x;
}

/// Optional introspection of a round, for verification and tests.
struct PairwiseDebug {
  double relay_scale = 1.0;
  CMatrix relay_signal;
  PrecoderSet precoders;
  std::map<int, cxd> recorded_sample;  // user -> raw recorded observation
  std::map<int, cxd> aligned_value;    // user -> aligned block at broadcast
};

/// Full round for any variant. Phase one over the direct channels, relay
/// forwarding with exact power normalization, broadcast, and per-user
/// cancellation + solve. Reports carry exact noise covariances.
inline RoundResult pairwise_run_round(const ChannelSet& channels,
                                      const PairwiseConfig& cfg, double p,
                                      bool noise_on, Rng& rng,
                                      const Tolerance& tol = Tolerance{},
                                      const SymbolMatrix* symbols_override =
                                          nullptr,
                                      PairwiseDebug* debug = nullptr) {
  const PairwiseVariant variant = cfg.variant;
  const int users = kPairwiseUsers;
  if (channels.topology.num_users != users ||
      channels.topology.relay_dim != kPairwiseAntennas ||
      channels.topology.relay_kind != RelayKind::colocated ||
      channels.slot_count < pairwise_slot_count(variant)) {
    throw ConfigError("pairwise_run_round: channel set does not match scheme");
  }
  const double sqrt_p = std::sqrt(p);
  const SlotPlan plan = pairwise_build_plan(variant);
  const auto messages = pairwise_message_set(variant);
  const SymbolMatrix symbols = symbols_override
                                   ? *symbols_override
                                   : draw_symbols(users, messages, rng);
  const auto tx_table = detail::pairwise_tx_table(variant);
  const int bcast_slot = pairwise_slot_count(variant) - 1;

  // Phase one: direct transmissions; users and relay record samples.
  std::vector<std::map<int, cxd>> user_sample(
      static_cast<std::size_t>(users));  // user -> slot -> sample
  std::vector<CMatrix> relay_rx;
  std::vector<CMatrix> uplinks;
  std::vector<std::vector<std::pair<int, int>>> block_syms;
  for (std::size_t t = 0; t < tx_table.size(); ++t) {
    std::map<int, CMatrix> tx;
    std::vector<CMatrix> cols;
    std::vector<std::pair<int, int>> syms;
    for (const auto& [src, sym] : tx_table[t]) {
      tx.emplace(src, CMatrix{{sqrt_p * symbols(sym.first, sym.second)}});
      cols.push_back(channels.slots[t].uplink.at(static_cast<std::size_t>(src)));
      syms.push_back(sym);
    }
    auto rx = propagate(channels, static_cast<int>(t), plan.slots[t], tx,
                        noise_on, rng);
    for (const auto& [node, sig] : rx) {
      if (node == kRelayNode) continue;
      user_sample[static_cast<std::size_t>(node)][static_cast<int>(t)] =
          sig(0, 0);
    }
    relay_rx.push_back(rx.at(kRelayNode));
    uplinks.push_back(hstack(cols));
    block_syms.push_back(std::move(syms));
  }

  // Relay estimates and forwarded-noise covariances per block.
  std::map<std::pair<int, int>, cxd> estimate;
  std::vector<CMatrix> block_cov;
  for (std::size_t t = 0; t < relay_rx.size(); ++t) {
    if (cfg.genie_relay || !noise_on) {
      for (const auto& sym : block_syms[t]) {
        estimate[sym] = symbols(sym.first, sym.second);
      }
      block_cov.push_back(CMatrix(block_syms[t].size(), block_syms[t].size()));
    } else {
      const CMatrix est = relay_zf_decode(relay_rx[t], uplinks[t], sqrt_p, tol);
      for (std::size_t i = 0; i < block_syms[t].size(); ++i) {
        estimate[block_syms[t][i]] = est(i, 0);
      }
      block_cov.push_back(zf_noise_cov(uplinks[t], tol));
    }
  }

  // Broadcast signal with exact power normalization.
  const PrecoderSet precoders = pairwise_build_precoders(channels, variant, tol);
  const bool unit_beams = variant == PairwiseVariant::ic_nullspace ||
                          variant == PairwiseVariant::ic_af;
  const double base_weight =
      unit_beams ? 1.0 / std::sqrt(static_cast<double>(messages.size())) : 1.0;
  std::vector<RelayStream> streams;
  for (const auto& sym : messages) {
    RelayStream s;
    s.symbol = sym;
    s.beam = precoders.at(bcast_slot, sym.first, sym.second);
    s.base_weight = base_weight;
    if (noise_on && !cfg.genie_relay) {
      for (std::size_t t = 0; t < block_syms.size(); ++t) {
        const auto it =
            std::find(block_syms[t].begin(), block_syms[t].end(), sym);
        if (it != block_syms[t].end()) {
          s.block = static_cast<int>(t);
          s.index_in_block =
              static_cast<int>(it - block_syms[t].begin());
          break;
        }
      }
    }
    streams.push_back(std::move(s));
  }
  const double gamma =
      1.0 / std::sqrt(relay_power_factor(streams, block_cov, p));
  const double scale = gamma * base_weight;

  CMatrix x_r(kPairwiseAntennas, 1);
  if (variant == PairwiseVariant::ic_af && !cfg.genie_relay) {
    std::vector<std::vector<CMatrix>> beam_blocks(block_syms.size());
    for (std::size_t t = 0; t < block_syms.size(); ++t) {
      for (const auto& sym : block_syms[t]) {
        beam_blocks[t].push_back(
            precoders.at(bcast_slot, sym.first, sym.second));
      }
    }
    x_r = ic_af_transmit(relay_rx, uplinks, beam_blocks, scale, tol);
  } else {
    for (const auto& s : streams) {
      x_r = x_r + s.beam * (sqrt_p * scale * estimate.at(s.symbol));
    }
  }

  auto rx = propagate(channels, bcast_slot,
                      plan.slots[static_cast<std::size_t>(bcast_slot)],
                      {{kRelayNode, x_r}}, noise_on, rng);

  if (debug) {
    debug->relay_scale = scale;
    debug->relay_signal = x_r;
    debug->precoders = precoders;
  }

  // Per-user decode.
  RoundResult result;
  result.slot_count = pairwise_slot_count(variant);
  result.symbol_count = static_cast<int>(messages.size());
  result.noise_on = noise_on;
  result.genie_relay = cfg.genie_relay;
  const auto plans = detail::pairwise_user_plans(variant);
  const auto& down = channels.slots[static_cast<std::size_t>(bcast_slot)]
                         .downlink;
  for (int j = 0; j < users; ++j) {
    const auto& up = plans[static_cast<std::size_t>(j)];
    const std::size_t rows = (up.direct_slot ? 1u : 0u) + 1u;
    const std::size_t cols = up.cols.size();
    CMatrix h_eff(rows, cols);
    CMatrix obs(rows, 1);
    CMatrix noise_cov(rows, rows);
    std::size_t r = 0;
    if (up.direct_slot) {
      const auto& uu =
          channels.slots[static_cast<std::size_t>(*up.direct_slot)].user_user;
      for (std::size_t c = 0; c < cols; ++c) {
        h_eff(r, c) = uu(j, up.cols[c].second);
      }
      obs(r, 0) = user_sample[static_cast<std::size_t>(j)].at(*up.direct_slot);
      noise_cov(r, r) += 1.0;
      ++r;
    }

    // Broadcast row: cancel own symbols, subtract the recorded sample,
    // keep the exact noise bookkeeping for every forwarded stream.
    const CMatrix& dj = down[static_cast<std::size_t>(j)];
    std::map<std::pair<int, int>, cxd> eff;
    for (const auto& sym : messages) {
      eff[sym] =
          (dj * precoders.at(bcast_slot, sym.first, sym.second))(0, 0) * scale;
    }
    cxd cleaned = rx.at(j)(0, 0);
    for (const auto& sym : up.self_syms) {
      cleaned -= sqrt_p * eff.at(sym) * symbols(sym.first, sym.second);
    }
    double extra_var = 1.0;
    if (up.recorded_slot) {
      const cxd recorded =
          user_sample[static_cast<std::size_t>(j)].at(*up.recorded_slot);
      cleaned -= scale * recorded;
      extra_var += scale * scale;
      if (debug) {
        debug->recorded_sample[j] = recorded;
        cxd aligned{};
        for (const auto& sym : up.aligned_syms) {
          aligned += sqrt_p * eff.at(sym) * symbols(sym.first, sym.second);
        }
        debug->aligned_value[j] = aligned;
      }
    }
    for (std::size_t c = 0; c < cols; ++c) h_eff(r, c) = eff.at(up.cols[c]);
    obs(r, 0) = cleaned;
    noise_cov(r, r) += extra_var;
    if (noise_on && !cfg.genie_relay) {
      for (std::size_t t = 0; t < block_syms.size(); ++t) {
        CMatrix coeff(rows, block_syms[t].size());
        for (std::size_t i = 0; i < block_syms[t].size(); ++i) {
          coeff(r, i) = eff.at(block_syms[t][i]);
        }
        add_block_cov(noise_cov, coeff, block_cov[t]);
      }
    }

    DecodeReport rep;
    rep.user = j;
    rep.h_eff = h_eff;
    rep.noise_cov = noise_cov;
    rep.desired_cols = up.desired;
    rep.h_eff_rank = rank(h_eff, tol);
    if (rep.h_eff_rank < cols) {
      throw RankDeficientError(
          "pairwise_run_round: effective matrix rank-deficient");
    }
    const CMatrix sol = solve(h_eff, obs * cxd{1.0 / sqrt_p, 0.0}, tol);
    CMatrix truth(cols, 1);
    for (std::size_t c = 0; c < cols; ++c) {
      truth(c, 0) = symbols(up.cols[c].first, up.cols[c].second);
      rep.truth.push_back(truth(c, 0));
      rep.recovered.push_back(sol(c, 0));
    }
    for (std::size_t d : up.desired) {
      rep.max_desired_error = std::max(
          rep.max_desired_error, std::abs(sol(d, 0) - truth(d, 0)));
    }
    rep.residual_rel_power =
        relative_residual(obs, h_eff * truth * cxd{sqrt_p, 0.0});
    result.reports.push_back(std::move(rep));
  }
  return result;
}

}  // namespace relaydof

#endif  // RELAYDOF_SCHEME_PAIRWISE_HPP
