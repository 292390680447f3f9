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

#ifndef RELAYDOF_DOF_HPP
#define RELAYDOF_DOF_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "relaydof/channel.hpp"
#include "relaydof/cmatrix.hpp"
#include "relaydof/scheme_common.hpp"

namespace relaydof {

/// Finite-power rates of one round: per-stream MMSE SINRs, per-user rates
/// in bits per slot (amortized over the round length), and their sum.
struct RateReport {
  std::vector<std::vector<double>> per_stream_sinr;
  std::vector<double> per_user_rate;
  double sum_rate = 0.0;
};

namespace detail {

inline CMatrix select_cols(const CMatrix& m,
                           const std::vector<std::size_t>& cols) {
  CMatrix r(m.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) r(i, j) = m(i, cols[j]);
  return r;
}

inline double log2_capacity(const CMatrix& h, const CMatrix& noise_cov_inv_h,
                            double p) {
  // log2 det(I + P * H^H C^-1 H)
  const CMatrix gram = h.adjoint() * noise_cov_inv_h;
  CMatrix m = CMatrix::identity(gram.rows());
  m = m + gram * cxd{p, 0.0};
  return log2_abs_det(m);
}

}  // namespace detail

/// Rates from one user's stacked system: the mutual information of the
/// whole observation, minus the part attributable to columns that are not
/// the user's own messages (a pair-partner byproduct the stacked solve
/// also recovers). With symbols at power P and the report's exact noise
/// covariance the signal model is y = sqrt(P) H s + z, z ~ C N(0, C).
inline RateReport round_sum_rate(const RoundResult& round, double p,
                                 const Tolerance& tol = Tolerance{}) {
  if (!round.noise_on) {
    throw ConfigError(
        "round_sum_rate: rates require noise (noise-off rates diverge)");
  }
  RateReport out;
  for (const auto& rep : round.reports) {
    CMatrix cinv_h;
    try {
      cinv_h = solve(rep.noise_cov, rep.h_eff, tol);
    } catch (const SingularMatrixError&) {
      throw SingularNoiseCovError("round_sum_rate: noise covariance singular");
    }
    const double full = detail::log2_capacity(rep.h_eff, cinv_h, p);
    std::vector<std::size_t> byproduct;
    for (std::size_t c = 0; c < rep.h_eff.cols(); ++c) {
      if (std::find(rep.desired_cols.begin(), rep.desired_cols.end(), c) ==
          rep.desired_cols.end()) {
        byproduct.push_back(c);
      }
    }
    double excess = 0.0;
    if (!byproduct.empty()) {
      const CMatrix hb = detail::select_cols(rep.h_eff, byproduct);
      const CMatrix cinv_hb = solve(rep.noise_cov, hb, tol);
      excess = detail::log2_capacity(hb, cinv_hb, p);
    }
    const double rate =
        std::max(0.0, (full - excess) / static_cast<double>(round.slot_count));
    out.per_user_rate.push_back(rate);
    out.sum_rate += rate;

    // per-stream MMSE SINRs of the desired columns
    const CMatrix gram = rep.h_eff.adjoint() * cinv_h;
    CMatrix m = CMatrix::identity(gram.rows());
    m = m + gram * cxd{p, 0.0};
    const CMatrix minv = inverse(m, tol);
    std::vector<double> sinrs;
    for (std::size_t c : rep.desired_cols) {
      sinrs.push_back(1.0 / minv(c, c).real() - 1.0);
    }
    out.per_stream_sinr.push_back(std::move(sinrs));
  }
  return out;
}

/// Slope of mean sum-rate against log2(P) over the top half of the power
/// grid, with the fit's standard error.
struct DofEstimate {
  std::vector<double> snr_grid_db;
  std::vector<double> mean_rates;
  std::vector<double> stderr_rates;
  double slope = 0.0;
  double slope_stderr = 0.0;
  int trials = 0;
  int aborted_trials = 0;
  bool valid = false;
  std::uint64_t seed = 0;
};

using ChannelDrawer = std::function<ChannelSet(Rng&)>;
using RoundRunner =
    std::function<RoundResult(const ChannelSet&, double, Rng&)>;

inline int env_thread_cap() {
  if (const char* s = std::getenv("RELAYDOF_THREADS")) {
    const int v = std::atoi(s);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

inline constexpr int kMaxRedraws = 5;
inline constexpr double kMaxAbortFraction = 0.01;

/// Monte Carlo sum-rate sweep and slope fit. Each trial owns a seed
/// derived from (seed, trial) and one channel realization reused across
/// the grid; degenerate draws are redrawn up to kMaxRedraws times, then
/// the trial aborts and is excluded (the estimate is marked invalid if
/// more than 1% abort). Trials run in parallel but are reduced in trial
/// order, so results are identical for any thread count.
inline DofEstimate estimate_dof(const ChannelDrawer& draw,
                                const RoundRunner& run,
                                const std::vector<double>& snr_grid_db,
                                int trials, std::uint64_t seed,
                                int max_threads = 0) {
  if (snr_grid_db.size() < 3) {
    throw ConfigError("estimate_dof: need at least 3 grid points");
  }
  for (std::size_t i = 1; i < snr_grid_db.size(); ++i) {
    if (!(snr_grid_db[i] > snr_grid_db[i - 1])) {
      throw ConfigError("estimate_dof: grid must be strictly increasing");
    }
  }
  if (trials < 1) throw ConfigError("estimate_dof: trials >= 1");

  const std::size_t grid_n = snr_grid_db.size();
  std::vector<double> powers(grid_n);
  for (std::size_t i = 0; i < grid_n; ++i) {
    powers[i] = std::pow(10.0, snr_grid_db[i] / 10.0);
  }

  std::vector<std::vector<double>> rates(
      static_cast<std::size_t>(trials));
  std::vector<char> aborted(static_cast<std::size_t>(trials), 0);

  auto run_trial = [&](int t) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(t)));
    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
      try {
        const ChannelSet channels = draw(rng);
        std::vector<double> row;
        row.reserve(grid_n);
        for (double p : powers) {
          const RoundResult rr = run(channels, p, rng);
          row.push_back(round_sum_rate(rr, p).sum_rate);
        }
        rates[static_cast<std::size_t>(t)] = std::move(row);
        return;
      } catch (const NumericalError&) {
        continue;  // degenerate draw, redraw
      }
    }
    aborted[static_cast<std::size_t>(t)] = 1;
  };

  int threads = env_thread_cap();
  if (max_threads > 0) threads = std::min(threads, max_threads);
  threads = std::min(threads, trials);
  if (threads <= 1) {
    for (int t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int t = next.fetch_add(1);
          if (t >= trials) return;
          run_trial(t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  DofEstimate est;
  est.snr_grid_db = snr_grid_db;
  est.trials = trials;
  est.seed = seed;
  est.mean_rates.assign(grid_n, 0.0);
  est.stderr_rates.assign(grid_n, 0.0);
  int used = 0;
  for (int t = 0; t < trials; ++t) {
    if (aborted[static_cast<std::size_t>(t)]) {
      ++est.aborted_trials;
      continue;
    }
    ++used;
    for (std::size_t i = 0; i < grid_n; ++i) {
      est.mean_rates[i] += rates[static_cast<std::size_t>(t)][i];
    }
  }
  if (used == 0) throw ConfigError("estimate_dof: every trial aborted");
  for (std::size_t i = 0; i < grid_n; ++i) est.mean_rates[i] /= used;
  for (int t = 0; t < trials; ++t) {
    if (aborted[static_cast<std::size_t>(t)]) continue;
    for (std::size_t i = 0; i < grid_n; ++i) {
      const double d = rates[static_cast<std::size_t>(t)][i] -
                       est.mean_rates[i];
      est.stderr_rates[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < grid_n; ++i) {
    est.stderr_rates[i] =
        used > 1 ? std::sqrt(est.stderr_rates[i] / (used - 1) / used) : 0.0;
  }

  // least-squares slope over the top half of the grid (>= 3 points)
  const std::size_t n_fit =
      std::max<std::size_t>(3, (grid_n + 1) / 2);
  const std::size_t first = grid_n - n_fit;
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = first; i < grid_n; ++i) {
    sx += std::log2(powers[i]);
    sy += est.mean_rates[i];
  }
  const double mx = sx / n_fit, my = sy / n_fit;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = first; i < grid_n; ++i) {
    const double dx = std::log2(powers[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (est.mean_rates[i] - my);
  }
  est.slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = first; i < grid_n; ++i) {
    const double fit = my + est.slope * (std::log2(powers[i]) - mx);
    const double r = est.mean_rates[i] - fit;
    ss_res += r * r;
  }
  est.slope_stderr =
      n_fit > 2 ? std::sqrt(ss_res / (n_fit - 2) / sxx) : 0.0;
  est.valid = est.aborted_trials <=
              static_cast<int>(kMaxAbortFraction * trials);
  return est;
}

}  // namespace relaydof

#endif  // RELAYDOF_DOF_HPP
