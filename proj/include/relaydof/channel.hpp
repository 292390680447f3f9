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

#ifndef RELAYDOF_CHANNEL_HPP
#define RELAYDOF_CHANNEL_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "relaydof/cmatrix.hpp"
#include "relaydof/errors.hpp"
#include "relaydof/rng.hpp"

namespace relaydof {

/// Logical node id of the relay side (a co-located array or the set of
/// distributed relays, which always transmit/listen in the same slots).
inline constexpr int kRelayNode = -1;

enum class RelayKind { colocated, distributed };

/// Network shape: K single-antenna users plus either one relay with
/// `relay_dim` antennas or `relay_dim` distributed single-antenna relays.
struct Topology {
  int num_users = 0;
  RelayKind relay_kind = RelayKind::colocated;
  int relay_dim = 0;

  static Topology colocated(int users, int antennas) {
    if (users < 2 || antennas < 1) {
      throw ConfigError("Topology: need K >= 2 users and N >= 1 antennas");
    }
    return {users, RelayKind::colocated, antennas};
  }

  static Topology distributed(int users, int relays) {
    if (users < 2 || relays < 1) {
      throw ConfigError("Topology: need K >= 2 users and R >= 1 relays");
    }
    return {users, RelayKind::distributed, relays};
  }
};

/// Channel coefficients of one time slot. All magnitudes lie in the
/// configured band. `downlink` rows are stored as the row vector that
/// multiplies the relay transmit vector, so received = downlink * x_R.
struct SlotChannels {
  CMatrix user_user;              // K x K, (k,l) = gain from user l to user k
  std::vector<CMatrix> uplink;    // per user: relay_dim x 1 column
  std::vector<CMatrix> downlink;  // per user: 1 x relay_dim row
};

/// One network realization across all slots of a scheme round.
/// Immutable after creation; trials may share it across threads.
struct ChannelSet {
  Topology topology;
  int slot_count = 0;
  double h_min = 0.0;
  double h_max = 0.0;
  std::vector<SlotChannels> slots;
};

inline constexpr double kDefaultHMin = 0.05;
inline constexpr double kDefaultHMax = 20.0;

/// Draw an independent realization: every coefficient is a complex
/// Gaussian rejection-sampled to the magnitude band, fresh per slot and
/// per link. This overload draws from a live generator (trial-local
/// streams); the seeded overload below is deterministic given the seed.
inline ChannelSet draw_realization(const Topology& topology, int slot_count,
                                   Rng& rng, double h_min = kDefaultHMin,
                                   double h_max = kDefaultHMax) {
  if (!(h_min > 0.0) || !(h_min < h_max)) {
    throw BadBandError("draw_realization: need 0 < h_min < h_max");
  }
  const int users = topology.num_users;
  const int dim = topology.relay_dim;
  ChannelSet cs;
  cs.topology = topology;
  cs.slot_count = slot_count;
  cs.h_min = h_min;
  cs.h_max = h_max;
  cs.slots.reserve(static_cast<std::size_t>(slot_count));
  for (int n = 0; n < slot_count; ++n) {
    SlotChannels sc{CMatrix(users, users), {}, {}};
    for (int k = 0; k < users; ++k)
      for (int l = 0; l < users; ++l)
        if (k != l)
          sc.user_user(k, l) = rng.banded_complex_gaussian(h_min, h_max);
    sc.uplink.reserve(users);
    sc.downlink.reserve(users);
    for (int k = 0; k < users; ++k) {
      CMatrix up(dim, 1), down(1, dim);
      for (int a = 0; a < dim; ++a) {
        up(a, 0) = rng.banded_complex_gaussian(h_min, h_max);
        down(0, a) = rng.banded_complex_gaussian(h_min, h_max);
      }
      sc.uplink.push_back(std::move(up));
      sc.downlink.push_back(std::move(down));
    }
    cs.slots.push_back(std::move(sc));
  }
  return cs;
}

inline ChannelSet draw_realization(const Topology& topology, int slot_count,
                                   std::uint64_t seed,
                                   double h_min = kDefaultHMin,
                                   double h_max = kDefaultHMax) {
  if (slot_count < 1) throw ConfigError("draw_realization: slot_count >= 1");
  Rng rng(seed);
  return draw_realization(topology, slot_count, rng, h_min, h_max);
}

/// Source/destination sets of one slot. Nodes are user indices plus
/// kRelayNode; half-duplex demands the sets be disjoint.
struct Slot {
  std::vector<int> sources;
  std::vector<int> destinations;

  bool is_source(int node) const {
    return std::find(sources.begin(), sources.end(), node) != sources.end();
  }
  bool is_destination(int node) const {
    return std::find(destinations.begin(), destinations.end(), node) !=
           destinations.end();
  }
};

struct SlotPlan {
  std::vector<Slot> slots;
};

inline void check_half_duplex(const Slot& slot) {
  for (int s : slot.sources) {
    if (slot.is_destination(s)) {
      throw HalfDuplexError("node " + std::to_string(s) +
                            " appears in both source and destination sets");
    }
  }
}

inline void check_half_duplex(const SlotPlan& plan) {
  for (const auto& s : plan.slots) check_half_duplex(s);
}

/// One propagation step: every destination receives the channel-weighted
/// sum of all source transmissions, plus optional unit-variance noise.
/// `tx` maps node -> signal (users 1x1, relay relay_dim x 1). Nodes not in
/// the destination set receive nothing.
inline std::map<int, CMatrix> propagate(const ChannelSet& channels,
                                        int slot_index, const Slot& slot,
                                        const std::map<int, CMatrix>& tx,
                                        bool noise_on, Rng& rng) {
  check_half_duplex(slot);
  for (const auto& [node, sig] : tx) {
    (void)sig;
    if (!slot.is_source(node)) {
      throw ConfigError("propagate: transmitting node " +
                        std::to_string(node) + " is not in the source set");
    }
  }
  const auto& sc = channels.slots.at(static_cast<std::size_t>(slot_index));
  const int dim = channels.topology.relay_dim;
  std::map<int, CMatrix> rx;
  for (int node : slot.destinations) {
    if (node == kRelayNode) {
      CMatrix y(dim, 1);
      for (const auto& [src, sig] : tx) {
        if (src == kRelayNode) continue;
        y = y + sc.uplink.at(static_cast<std::size_t>(src)) * sig(0, 0);
      }
      if (noise_on) {
        for (int a = 0; a < dim; ++a) y(a, 0) += rng.complex_gaussian();
      }
      rx.emplace(node, std::move(y));
    } else {
      cxd y{};
      for (const auto& [src, sig] : tx) {
        if (src == kRelayNode) {
          const CMatrix& row = sc.downlink.at(static_cast<std::size_t>(node));
          for (int a = 0; a < dim; ++a) y += row(0, a) * sig(a, 0);
        } else {
          y += sc.user_user(node, src) * sig(0, 0);
        }
      }
      if (noise_on) y += rng.complex_gaussian();
      rx.emplace(node, CMatrix{{y}});
    }
  }
  return rx;
}

/// Unit-variance complex Gaussian information symbols, one per active
/// message (dest, src). Inactive (null) messages stay zero.
struct SymbolMatrix {
  CMatrix value;                        // K x K, (dest, src)
  std::vector<std::pair<int, int>> active;  // (dest, src) with a message

  const cxd& operator()(int dest, int src) const { return value(dest, src); }
};

inline SymbolMatrix draw_symbols(int users,
                                 const std::vector<std::pair<int, int>>& active,
                                 Rng& rng) {
  SymbolMatrix s{CMatrix(users, users), active};
  for (const auto& [dest, src] : active) {
    s.value(dest, src) = rng.complex_gaussian();
  }
  return s;
}

}  // namespace relaydof

#endif  // RELAYDOF_CHANNEL_HPP
