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

#ifndef RELAYDOF_SCHEME_COMMON_HPP
#define RELAYDOF_SCHEME_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "relaydof/channel.hpp"
#include "relaydof/cmatrix.hpp"

namespace relaydof {

/// Relay beamforming vectors of one scheme instance, keyed by slot and by
/// the (destination, source) pair of the symbol each vector carries.
struct PrecoderSet {
  std::map<int, std::map<std::pair<int, int>, CMatrix>> by_slot;

  const CMatrix& at(int slot, int dest, int src) const {
    return by_slot.at(slot).at({dest, src});
  }
};

/// Everything one user's decoder produced for one round: the stacked
/// effective matrix (transmit scale sqrt(P) factored out), the exact
/// aggregate noise covariance of the stacked observation, which columns
/// are the user's own messages, and the recovered symbols.
struct DecodeReport {
  int user = 0;
  CMatrix h_eff;
  CMatrix noise_cov;
  std::vector<std::size_t> desired_cols;
  std::vector<cxd> recovered;
  std::vector<cxd> truth;
  double max_desired_error = 0.0;
  double residual_rel_power = 0.0;
  std::size_t h_eff_rank = 0;
};

struct RoundResult {
  std::vector<DecodeReport> reports;
  int slot_count = 0;
  int symbol_count = 0;
  bool noise_on = false;
  bool genie_relay = false;
};

/// Zero-forcing (least-squares) symbol estimates at a multi-antenna relay.
/// `uplink` stacks one column per transmitting stream; `y` is the relay
/// observation; estimates are returned at unit symbol scale (the sqrt(P)
/// transmit factor divided out). Noise-off estimates are exact.
inline CMatrix relay_zf_decode(const CMatrix& y, const CMatrix& uplink,
                               double sqrt_p,
                               const Tolerance& tol = Tolerance{}) {
  if (rank(uplink, tol) < uplink.cols()) {
    throw RankDeficientError("relay_zf_decode: uplink not full column rank");
  }
  const CMatrix uh = uplink.adjoint();
  const CMatrix gram = uh * uplink;
  CMatrix est = solve(gram, uh * y, tol);
  return est * cxd{1.0 / sqrt_p, 0.0};
}

/// Covariance of sqrt(P) * (estimate - symbol) for the ZF decoder above:
/// (H^H H)^{-1}. Independent of P, which is what keeps forwarded relay
/// noise from affecting the high-SNR slope.
inline CMatrix zf_noise_cov(const CMatrix& uplink,
                            const Tolerance& tol = Tolerance{}) {
  const CMatrix gram = uplink.adjoint() * uplink;
  return inverse(gram, tol);
}

/// One relay transmit stream: a beamforming vector applied to a (possibly
/// noisy) forwarded estimate, with bookkeeping linking the stream to the
/// phase-one block whose ZF noise it carries.
struct RelayStream {
  std::pair<int, int> symbol;  // (dest, src)
  CMatrix beam;                // relay_dim x 1
  double base_weight = 1.0;    // per-stream allocation before global scale
  int block = -1;              // phase-one block index (-1: genie/no noise)
  int index_in_block = 0;
};

/// Expected relay transmit power per unit P for a set of streams carrying
/// unit-variance symbols plus forwarded ZF noise with per-block covariance
/// sigma/P. Includes all cross terms, so scaling every beam by
/// 1/sqrt(design_power_factor) meets E||x_R||^2 = P exactly.
inline double relay_power_factor(const std::vector<RelayStream>& streams,
                                 const std::vector<CMatrix>& block_covs,
                                 double p) {
  double q = 0.0;
  for (const auto& s : streams) {
    const double fn = s.beam.frobenius_norm();
    q += s.base_weight * s.base_weight * fn * fn;
  }
  for (std::size_t i = 0; i < streams.size(); ++i) {
    for (std::size_t j = 0; j < streams.size(); ++j) {
      const auto& a = streams[i];
      const auto& b = streams[j];
      if (a.block < 0 || a.block != b.block) continue;
      const CMatrix& sigma = block_covs[static_cast<std::size_t>(a.block)];
      cxd dot{};
      for (std::size_t r = 0; r < a.beam.rows(); ++r) {
        dot += std::conj(a.beam(r, 0)) * b.beam(r, 0);
      }
      const cxd cov = sigma(static_cast<std::size_t>(b.index_in_block),
                            static_cast<std::size_t>(a.index_in_block));
      q += a.base_weight * b.base_weight * (dot * cov).real() / p;
    }
  }
  return q;
}

/// C += A * sigma * A^H, the contribution of one correlated noise block
/// (coefficient rows A, block covariance sigma) to a stacked observation's
/// covariance.
inline void add_block_cov(CMatrix& c, const CMatrix& a, const CMatrix& sigma) {
  const CMatrix t = a * sigma * a.adjoint();
  c = c + t;
}

/// Residual power of a stacked observation after removing the explained
/// desired-signal part, relative to the observation power. Noise-off this
/// is the leaked-interference measure and must sit at numerical zero.
inline double relative_residual(const CMatrix& observed,
                                const CMatrix& explained) {
  const double denom = observed.frobenius_norm();
  if (denom == 0.0) return 0.0;
  const CMatrix r = observed - explained;
  const double num = r.frobenius_norm();
  return (num * num) / (denom * denom);
}

}  // namespace relaydof

#endif  // RELAYDOF_SCHEME_COMMON_HPP
