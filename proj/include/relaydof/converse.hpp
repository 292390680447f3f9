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

#ifndef RELAYDOF_CONVERSE_HPP
#define RELAYDOF_CONVERSE_HPP

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "relaydof/cmatrix.hpp"
#include "relaydof/errors.hpp"

namespace relaydof {

/// Cut-set time-sharing bound for one cooperating cut of the K-user
/// network, as a linear program over the six half-duplex network states.
/// Objective (maximized over the state-time simplex):
///   min{(K-1)(l1+l3)+l5, l1+l4+l5} + min{l2+l3+l6, l2+(K-1)(l4+l6)}
/// solved exactly through the epigraph form by brute-force vertex
/// enumeration; the polytope has 8 variables and 13 constraints.
struct LpSolution {
  double value = 0.0;
  std::array<double, 6> lambda{};
  std::vector<std::string> binding;
};

namespace detail {

// epigraph inequality rows: coeff . x <= rhs, x = (l1..l6, t1, t2)
struct LpRow {
  std::array<double, 8> coeff;
  double rhs;
  std::string name;
};

inline std::vector<LpRow> lp_rows(int users) {
  const double km1 = static_cast<double>(users - 1);
  std::vector<LpRow> rows;
  for (int i = 0; i < 6; ++i) {
    LpRow r{{}, 0.0, "state" + std::to_string(i + 1) + "_nonneg"};
    r.coeff[static_cast<std::size_t>(i)] = -1.0;
    rows.push_back(std::move(r));
  }
  rows.push_back({{0, 0, 0, 0, 0, 0, -1, 0}, 0.0, "rate1_nonneg"});
  rows.push_back({{0, 0, 0, 0, 0, 0, 0, -1}, 0.0, "rate2_nonneg"});
  rows.push_back(
      {{-km1, 0, -km1, 0, -1, 0, 1, 0}, 0.0, "rate1_source_cut"});
  rows.push_back({{-1, 0, 0, -1, -1, 0, 1, 0}, 0.0, "rate1_dest_cut"});
  rows.push_back({{0, -1, -1, 0, 0, -1, 0, 1}, 0.0, "rate2_source_cut"});
  rows.push_back(
      {{0, -1, 0, -km1, 0, -km1, 0, 1}, 0.0, "rate2_dest_cut"});
  return rows;
}

}  // namespace detail

/// Exact optimum of the six-state cut LP via vertex enumeration: every
/// choice of 7 active inequalities plus the simplex equality defines a
/// candidate basic solution; feasible ones are scored by t1 + t2.
inline LpSolution lp_bound(int users) {
  if (users < 2) throw ConfigError("lp_bound: need K >= 2");
  const auto rows = detail::lp_rows(users);
  const std::size_t n_rows = rows.size();  // 12
  LpSolution best;
  best.value = -1.0;

  std::vector<std::size_t> pick;
  auto try_vertex = [&](const std::vector<std::size_t>& active) {
    CMatrix a(8, 8);
    CMatrix b(8, 1);
    for (std::size_t r = 0; r < 7; ++r) {
      for (std::size_t c = 0; c < 8; ++c) {
        a(r, c) = rows[active[r]].coeff[c];
      }
      b(r, 0) = rows[active[r]].rhs;
    }
    for (std::size_t c = 0; c < 6; ++c) a(7, c) = 1.0;  // sum of states = 1
    b(7, 0) = 1.0;
    CMatrix x;
    try {
      x = solve(a, b, Tolerance{1e-12});
    } catch (const SingularMatrixError&) {
      return;
    }
    // feasibility
    double sum = 0.0;
    for (std::size_t c = 0; c < 6; ++c) sum += x(c, 0).real();
    if (std::abs(sum - 1.0) > 1e-9) return;
    for (const auto& row : rows) {
      double lhs = 0.0;
      for (std::size_t c = 0; c < 8; ++c) {
        lhs += row.coeff[c] * x(c, 0).real();
      }
      if (lhs > row.rhs + 1e-9) return;
    }
    const double value = x(6, 0).real() + x(7, 0).real();
    if (value > best.value + 1e-12) {
      best.value = value;
      for (std::size_t c = 0; c < 6; ++c) best.lambda[c] = x(c, 0).real();
      best.binding.clear();
      for (const auto& row : rows) {
        double lhs = 0.0;
        for (std::size_t c = 0; c < 8; ++c) {
          lhs += row.coeff[c] * x(c, 0).real();
        }
        if (std::abs(lhs - row.rhs) <= 1e-9) best.binding.push_back(row.name);
      }
    }
  };

  // enumerate 7-subsets of the 12 inequality rows
  std::vector<std::size_t> idx(7);
  auto rec = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
    if (depth == 7) {
      try_vertex(idx);
      return;
    }
    for (std::size_t i = start; i < n_rows; ++i) {
      idx[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return best;
}

/// Adding one cut bound per user: each cut caps the two directions at one
/// degree of freedom total, so the sum over all exchanged messages is at
/// most K/2.
struct CutBoundSet {
  double sum_bound = 0.0;
  std::vector<double> per_cut;
};

inline CutBoundSet lemma1_sum_bound(int users) {
  if (users < 2) throw ConfigError("lemma1_sum_bound: need K >= 2");
  CutBoundSet out;
  out.per_cut.assign(static_cast<std::size_t>(users), 1.0);
  out.sum_bound = users / 2.0;
  return out;
}

}  // namespace relaydof

#endif  // RELAYDOF_CONVERSE_HPP
