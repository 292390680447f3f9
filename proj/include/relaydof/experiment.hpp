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

#ifndef RELAYDOF_EXPERIMENT_HPP
#define RELAYDOF_EXPERIMENT_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "relaydof/converse.hpp"
#include "relaydof/dof.hpp"
#include "relaydof/json_io.hpp"
#include "relaydof/scheme_distributed.hpp"
#include "relaydof/scheme_pairwise.hpp"
#include "relaydof/scheme_y.hpp"
#include "relaydof/svg.hpp"

namespace relaydof {

/// One experiment: a scheme id plus its parameters, the power grid, the
/// Monte Carlo budget, and output options.
struct ExperimentConfig {
  std::string scheme = "y";  // y | ic | ic_align | ic_af | x | dist_ic | dist_y
  int users = 0;             // 0: scheme default
  int relay_antennas = 0;    // 0: scheme default
  int relays = 0;            // 0: scheme default
  double snr_start_db = 50.0;
  double snr_stop_db = 90.0;
  double snr_step_db = 5.0;
  int trials = 200;
  std::uint64_t seed = 1;
  double h_min = kDefaultHMin;
  double h_max = kDefaultHMax;
  std::string out_dir = ".";
  bool genie_relay = false;
  int threads = 0;  // 0: RELAYDOF_THREADS env or hardware
};

/// A validated scheme instance: topology, round length, nominal slope,
/// and the two callables the Monte Carlo engine needs.
struct SchemeBinding {
  std::string scheme;
  Topology topology{};
  int slot_count = 0;
  double nominal_dof = 0.0;
  ChannelDrawer drawer;
  RoundRunner runner;
};

inline std::vector<std::string> known_schemes() {
  return {"y", "ic", "ic_align", "ic_af", "x", "dist_ic", "dist_y"};
}

inline SchemeBinding bind_scheme(const ExperimentConfig& cfg) {
  SchemeBinding b;
  b.scheme = cfg.scheme;
  const double h_min = cfg.h_min, h_max = cfg.h_max;
  if (!(h_min > 0.0) || !(h_min < h_max)) {
    throw ConfigError("bind_scheme: need 0 < hmin < hmax");
  }
  auto reject_param = [&](bool bad, const std::string& what) {
    if (bad) throw ConfigError("bind_scheme: " + what);
  };
  if (cfg.scheme == "y") {
    const int users = cfg.users ? cfg.users : 3;
    const int antennas = cfg.relay_antennas ? cfg.relay_antennas : users - 1;
    reject_param(users < 3, "scheme y needs --k >= 3");
    reject_param(antennas < users - 1, "scheme y needs --n >= K-1");
    reject_param(cfg.relays != 0, "scheme y uses one multi-antenna relay");
    b.topology = Topology::colocated(users, antennas);
    b.slot_count = y_slot_count(users);
    b.nominal_dof = users / 2.0;
    const YSchemeConfig scfg{users, antennas, cfg.genie_relay};
    b.runner = [scfg](const ChannelSet& cs, double p, Rng& rng) {
      return y_run_round(cs, scfg, p, true, rng);
    };
  } else if (cfg.scheme == "ic" || cfg.scheme == "ic_align" ||
             cfg.scheme == "ic_af" || cfg.scheme == "x") {
    reject_param(cfg.users != 0 && cfg.users != 4,
                 "scheme " + cfg.scheme + " is fixed at K=4");
    reject_param(cfg.relay_antennas != 0 && cfg.relay_antennas != 2,
                 "scheme " + cfg.scheme + " is fixed at N=2");
    reject_param(cfg.relays != 0,
                 "scheme " + cfg.scheme + " uses one two-antenna relay");
    PairwiseVariant v = PairwiseVariant::ic_nullspace;
    double nominal = 4.0 / 3.0;
    if (cfg.scheme == "ic_align") v = PairwiseVariant::ic_alignment;
    if (cfg.scheme == "ic_af") v = PairwiseVariant::ic_af;
    if (cfg.scheme == "x") {
      v = PairwiseVariant::x_channel;
      nominal = 8.0 / 5.0;
    }
    b.topology = Topology::colocated(4, 2);
    b.slot_count = pairwise_slot_count(v);
    b.nominal_dof = nominal;
    const PairwiseConfig scfg{v, cfg.genie_relay};
    b.runner = [scfg](const ChannelSet& cs, double p, Rng& rng) {
      return pairwise_run_round(cs, scfg, p, true, rng);
    };
  } else if (cfg.scheme == "dist_ic" || cfg.scheme == "dist_y") {
    const bool ic = cfg.scheme == "dist_ic";
    const int users = ic ? 4 : 3;
    reject_param(cfg.users != 0 && cfg.users != users,
                 "scheme " + cfg.scheme + " is fixed at K=" +
                     std::to_string(users));
    reject_param(cfg.relays != 0 && cfg.relays != kDistRelays,
                 "scheme " + cfg.scheme + " is fixed at R=3");
    reject_param(cfg.relay_antennas != 0,
                 "scheme " + cfg.scheme + " uses single-antenna relays");
    b.topology = Topology::distributed(users, kDistRelays);
    b.slot_count = ic ? 3 : 4;
    b.nominal_dof = ic ? 4.0 / 3.0 : 1.5;
    if (ic) {
      b.runner = [](const ChannelSet& cs, double p, Rng& rng) {
        return dist_ic_run_round(cs, p, true, rng);
      };
    } else {
      b.runner = [](const ChannelSet& cs, double p, Rng& rng) {
        return dist_y_run_round(cs, p, true, rng);
      };
    }
  } else {
    throw ConfigError("bind_scheme: unknown scheme '" + cfg.scheme + "'");
  }
  const Topology topo = b.topology;
  const int slots = b.slot_count;
  b.drawer = [topo, slots, h_min, h_max](Rng& rng) {
    return draw_realization(topo, slots, rng, h_min, h_max);
  };
  return b;
}

inline std::vector<double> snr_grid(const ExperimentConfig& cfg) {
  if (!(cfg.snr_step_db > 0.0) || !(cfg.snr_stop_db > cfg.snr_start_db)) {
    throw ConfigError("snr_grid: need start < stop and step > 0");
  }
  std::vector<double> grid;
  for (double db = cfg.snr_start_db; db <= cfg.snr_stop_db + 1e-9;
       db += cfg.snr_step_db) {
    grid.push_back(db);
  }
  if (grid.size() < 3) throw ConfigError("snr_grid: need at least 3 points");
  return grid;
}

// ---------------------------------------------------------------------------
// verify: noise-off algebraic checks of a scheme over many realizations
// ---------------------------------------------------------------------------

struct VerifyReport {
  bool passed = false;
  std::string first_failure;
  int trials = 0;
  int aborted = 0;
  double max_construction_residual = 0.0;
  double max_decode_error = 0.0;
  double max_interference_residual = 0.0;
  int rank_failures = 0;
  double max_af_df_mismatch = 0.0;          // ic_af only
  std::map<int, int> nullspace_dim_counts;  // dist_y only

  json to_json() const {
    json j;
    j["passed"] = passed;
    j["first_failure"] = first_failure;
    j["trials"] = trials;
    j["aborted"] = aborted;
    j["max_construction_residual"] = max_construction_residual;
    j["max_decode_error"] = max_decode_error;
    j["max_interference_residual"] = max_interference_residual;
    j["rank_failures"] = rank_failures;
    if (max_af_df_mismatch > 0.0) j["max_af_df_mismatch"] = max_af_df_mismatch;
    if (!nullspace_dim_counts.empty()) {
      json h = json::object();
      for (const auto& [dim, count] : nullspace_dim_counts) {
        h[std::to_string(dim)] = count;
      }
      j["nullspace_dim_histogram"] = std::move(h);
    }
    return j;
  }
};

namespace detail {

/// Worst relative construction residual of one noise-off realization:
/// null-space orthogonality, targeted equalities, or two-hop
/// neutralization, depending on the scheme.
inline double construction_residual(const SchemeBinding& b,
                                    const ChannelSet& cs) {
  double worst = 0.0;
  auto track = [&](double r) { worst = std::max(worst, r); };
  if (b.scheme == "y") {
    const int users = b.topology.num_users;
    for (int slot = users; slot < 2 * users - 2; ++slot) {
      const PrecoderSet p = y_build_relay_precoders(
          cs, users, b.topology.relay_dim, slot);
      const auto& down = cs.slots[static_cast<std::size_t>(slot)].downlink;
      for (const auto& [sym, v] : p.by_slot.at(slot)) {
        for (int j = 0; j < users; ++j) {
          if (j == sym.first || j == sym.second) continue;
          const auto& row = down[static_cast<std::size_t>(j)];
          track(std::abs((row * v)(0, 0)) / row.frobenius_norm());
        }
      }
    }
  } else if (b.scheme == "ic" || b.scheme == "ic_af") {
    const PrecoderSet p = ic_build_precoders(cs);
    const auto& down = cs.slots[2].downlink;
    const std::vector<std::pair<std::pair<int, int>, int>> nulls{
        {{2, 0}, 1}, {{3, 1}, 0}, {{0, 2}, 3}, {{1, 3}, 2}};
    for (const auto& [sym, user] : nulls) {
      const auto& row = down[static_cast<std::size_t>(user)];
      track(std::abs((row * p.at(2, sym.first, sym.second))(0, 0)) /
            row.frobenius_norm());
    }
  } else if (b.scheme == "ic_align") {
    const PrecoderSet p = ic_alignment_precoders(cs);
    const auto& down = cs.slots[2].downlink;
    struct Cond {
      std::pair<int, int> sym;
      int user;
      int tx_slot;
    };
    const std::vector<Cond> conds{{{2, 0}, 1, 0}, {{2, 0}, 3, 0},
                                  {{0, 2}, 1, 0}, {{0, 2}, 3, 0},
                                  {{3, 1}, 0, 1}, {{3, 1}, 2, 1},
                                  {{1, 3}, 0, 1}, {{1, 3}, 2, 1}};
    for (const auto& c : conds) {
      const cxd got = (down[static_cast<std::size_t>(c.user)] *
                       p.at(2, c.sym.first, c.sym.second))(0, 0);
      const cxd want = cs.slots[static_cast<std::size_t>(c.tx_slot)]
                           .user_user(c.user, c.sym.second);
      track(std::abs(got - want) / (1.0 + std::abs(want)));
    }
  } else if (b.scheme == "x") {
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
      const auto& nrow = down[static_cast<std::size_t>(c.null_user)];
      track(std::abs((nrow * v)(0, 0)) / nrow.frobenius_norm());
      const cxd want = cs.slots[static_cast<std::size_t>(c.tx_slot)]
                           .user_user(c.align_user, c.sym.second);
      const cxd got =
          (down[static_cast<std::size_t>(c.align_user)] * v)(0, 0);
      track(std::abs(got - want) / (1.0 + std::abs(want)));
    }
  } else if (b.scheme == "dist_ic") {
    const DistIcGains g = dist_ic_gains(cs);
    const CMatrix rows[4] = {dist_two_hop_row(cs, 0, 1, 0, 2),
                             dist_two_hop_row(cs, 1, 0, 0, 2),
                             dist_two_hop_row(cs, 2, 3, 1, 2),
                             dist_two_hop_row(cs, 3, 2, 1, 2)};
    track(std::abs((rows[0] * g.v1)(0, 0)) / rows[0].frobenius_norm());
    track(std::abs((rows[1] * g.v1)(0, 0)) / rows[1].frobenius_norm());
    track(std::abs((rows[2] * g.v2)(0, 0)) / rows[2].frobenius_norm());
    track(std::abs((rows[3] * g.v2)(0, 0)) / rows[3].frobenius_norm());
  } else if (b.scheme == "dist_y") {
    const DistYAssembly a = dist_y_assemble(cs);
    const CMatrix coding = dist_y_solve(a.f_bar);
    for (double r : dist_y_neutralization_residuals(cs, coding)) track(r);
  }
  return worst;
}

}  // namespace detail

/// Noise-off verification: every realization must construct cleanly,
/// decode exactly and leak nothing. Exit contract: passed == false names
/// the first failing invariant.
inline VerifyReport run_verify(const ExperimentConfig& cfg) {
  const SchemeBinding b = bind_scheme(cfg);
  VerifyReport rep;
  rep.trials = cfg.trials;
  const std::size_t expected_rank =
      b.scheme == "y" ? static_cast<std::size_t>(b.topology.num_users - 1)
      : b.scheme == "ic_align" ? 1u
                               : 2u;
  for (int t = 0; t < cfg.trials; ++t) {
    Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(t)));
    bool done = false;
    for (int attempt = 0; attempt <= kMaxRedraws && !done; ++attempt) {
      try {
        const ChannelSet cs = b.drawer(rng);
        rep.max_construction_residual = std::max(
            rep.max_construction_residual, detail::construction_residual(b, cs));

        RoundResult rr;
        if (b.scheme == "y") {
          rr = y_run_round(cs, {b.topology.num_users, b.topology.relay_dim,
                                cfg.genie_relay},
                           100.0, false, rng);
        } else if (b.scheme == "dist_ic") {
          rr = dist_ic_run_round(cs, 100.0, false, rng);
        } else if (b.scheme == "dist_y") {
          const DistYAssembly a = dist_y_assemble(cs);
          rep.nullspace_dim_counts[static_cast<int>(
              dist_y_nullspace_dim(a.f_bar))]++;
          rr = dist_y_run_round(cs, 100.0, false, rng);
        } else {
          PairwiseVariant v = PairwiseVariant::ic_nullspace;
          if (b.scheme == "ic_align") v = PairwiseVariant::ic_alignment;
          if (b.scheme == "ic_af") v = PairwiseVariant::ic_af;
          if (b.scheme == "x") v = PairwiseVariant::x_channel;
          if (b.scheme == "ic_af") {
            // noise-off cross-check of the two relay processing paths
            Rng rng_a(0), rng_b(0);
            const SymbolMatrix s =
                draw_symbols(4, pairwise_message_set(v), rng);
            PairwiseDebug ddf, daf;
            pairwise_run_round(cs, {PairwiseVariant::ic_nullspace, false},
                               100.0, false, rng_a, Tolerance{}, &s, &ddf);
            rr = pairwise_run_round(cs, {v, false}, 100.0, false, rng_b,
                                    Tolerance{}, &s, &daf);
            rep.max_af_df_mismatch =
                std::max(rep.max_af_df_mismatch,
                         (ddf.relay_signal - daf.relay_signal).max_abs());
          } else {
            rr = pairwise_run_round(cs, {v, cfg.genie_relay}, 100.0, false,
                                    rng);
          }
        }
        for (const auto& r : rr.reports) {
          rep.max_decode_error = std::max(rep.max_decode_error,
                                          r.max_desired_error);
          rep.max_interference_residual =
              std::max(rep.max_interference_residual, r.residual_rel_power);
          if (r.h_eff_rank != expected_rank) ++rep.rank_failures;
        }
        done = true;
      } catch (const NumericalError&) {
      }
    }
    if (!done) ++rep.aborted;
  }

  if (rep.max_construction_residual >= 1e-9) {
    rep.first_failure = "construction_residual";
  } else if (rep.rank_failures > 0) {
    rep.first_failure = "effective_matrix_rank";
  } else if (rep.max_decode_error >= 1e-8) {
    rep.first_failure = "decode_error";
  } else if (rep.max_interference_residual >= 1e-16) {
    rep.first_failure = "interference_residual";
  } else if (rep.max_af_df_mismatch >= 1e-9) {
    rep.first_failure = "af_df_mismatch";
  } else if (rep.aborted > 0) {
    rep.first_failure = "aborted_trials";
  }
  rep.passed = rep.first_failure.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// sweep: Monte Carlo sum-rate sweep, slope fit, CSV/SVG/JSON artifacts
// ---------------------------------------------------------------------------

struct SweepResult {
  DofEstimate estimate;
  double nominal_dof = 0.0;
  std::string csv_path, svg_path, json_path;
};

inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  const SchemeBinding b = bind_scheme(cfg);
  const std::vector<double> grid = snr_grid(cfg);
  SweepResult out;
  out.nominal_dof = b.nominal_dof;
  out.estimate = estimate_dof(b.drawer, b.runner, grid, cfg.trials, cfg.seed,
                              cfg.threads);

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  out.csv_path = (fs::path(cfg.out_dir) / "sweep.csv").string();
  out.svg_path = (fs::path(cfg.out_dir) / "sweep.svg").string();
  out.json_path = (fs::path(cfg.out_dir) / "dof.json").string();

  {
    std::ofstream f(out.csv_path, std::ios::binary);
    f << sweep_csv(out.estimate);
  }
  {
    char note[128];
    std::snprintf(note, sizeof(note), "fitted slope %.4f (nominal %.4f)",
                  out.estimate.slope, b.nominal_dof);
    std::ofstream f(out.svg_path, std::ios::binary);
    f << svg_line_chart("sum rate vs transmit power: scheme " + b.scheme,
                        "snr [dB]", "sum rate [bits/slot]",
                        out.estimate.snr_grid_db, out.estimate.mean_rates,
                        note);
  }
  {
    json j = to_json(out.estimate);
    j["scheme"] = b.scheme;
    j["users"] = b.topology.num_users;
    if (b.topology.relay_kind == RelayKind::colocated) {
      j["relay_antennas"] = b.topology.relay_dim;
    } else {
      j["relays"] = b.topology.relay_dim;
    }
    j["nominal_dof"] = b.nominal_dof;
    j["genie_relay"] = cfg.genie_relay;
    std::ofstream f(out.json_path, std::ios::binary);
    f << j.dump(2) << "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// lp: converse bound as JSON
// ---------------------------------------------------------------------------

inline json run_lp(int users) {
  const LpSolution s = lp_bound(users);
  const CutBoundSet cuts = lemma1_sum_bound(users);
  json j;
  j["users"] = users;
  j["value"] = s.value;
  std::vector<double> lambda(s.lambda.begin(), s.lambda.end());
  for (double& l : lambda) {
    if (std::abs(l) < 1e-12) l = 0.0;  // clean solver dust and signed zeros
  }
  j["lambda"] = lambda;
  j["binding_constraints"] = s.binding;
  j["sum_bound"] = cuts.sum_bound;
  j["per_cut_bounds"] = cuts.per_cut;
  return j;
}

}  // namespace relaydof

#endif  // RELAYDOF_EXPERIMENT_HPP
