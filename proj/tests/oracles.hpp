// Copyright 2026 The tscs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Brute-force reference computations shared by the tests. None of these
// call into the library's solvers; they only read realization data.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tscs.hpp"

#ifndef TSCS_SCENARIO_DIR
#define TSCS_SCENARIO_DIR "scenarios"
#endif

namespace oracle {

using tscs::Realization;
using tscs::Subset;

inline std::string scenario_path(const std::string& name) { return std::string(TSCS_SCENARIO_DIR) + "/" + name; }

inline double local(const Realization& r, std::size_t j, Subset s) {
  double v = 0.0;
  for (std::size_t i = 0; i < r.n(); ++i) {
    if ((s >> i) & 1u) v += r.buyers[i].values[j];
  }
  return v - r.sellers[j].cost(s);
}

/// Best welfare of the coalition (buyer mask, seller mask) by depth-first
/// assignment of each member buyer to a member seller or to nobody.
inline double coalition_welfare(const Realization& r, Subset buyers, Subset sellers) {
  const std::size_t n = r.n();
  const std::size_t m = r.m();
  std::vector<Subset> sets(m, 0);
  double best = -std::numeric_limits<double>::infinity();
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      double w = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (((sellers >> j) & 1u) != 0) w += local(r, j, sets[j]);
      }
      best = std::max(best, w);
      return;
    }
    self(self, i + 1);
    if (((buyers >> i) & 1u) == 0) return;
    for (std::size_t j = 0; j < m; ++j) {
      if (((sellers >> j) & 1u) == 0) continue;
      if (static_cast<std::size_t>(std::popcount(sets[j])) >= r.sellers[j].capacity) continue;
      sets[j] |= Subset{1} << i;
      self(self, i + 1);
      sets[j] &= ~(Subset{1} << i);
    }
  };
  rec(rec, 0);
  return best;
}

inline double optimal_welfare(const Realization& r) {
  return coalition_welfare(r, (Subset{1} << r.n()) - 1, (Subset{1} << r.m()) - 1);
}

/// Solves a square system by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t d = b.size();
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-10) return std::nullopt;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < d; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(d);
  for (std::size_t c = 0; c < d; ++c) x[c] = b[c] / a[c][c];
  return x;
}

/// Optimal value of the covering LP (minimize sum y + sum z subject to
/// y(S) + z_j >= V_j(S), y, z >= 0) by enumerating every vertex. Only
/// practical for a handful of agents.
inline double dual_by_vertices(const Realization& r) {
  const std::size_t n = r.n();
  const std::size_t m = r.m();
  const std::size_t d = n + m;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> e(d, 0.0);
    e[k] = 1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (Subset s = 1; s < (Subset{1} << n); ++s) {
      if (static_cast<std::size_t>(std::popcount(s)) > r.sellers[j].capacity) continue;
      std::vector<double> row(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) row[i] = ((s >> i) & 1u) ? 1.0 : 0.0;
      row[n + j] = 1.0;
      rows.push_back(row);
      rhs.push_back(local(r, j, s));
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(d);
  auto rec = [&](auto&& self, std::size_t k, std::size_t start) -> void {
    if (k == d) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (std::size_t t : pick) {
        a.push_back(rows[t]);
        b.push_back(rhs[t]);
      }
      const auto x = solve_square(a, b);
      if (!x) return;
      for (std::size_t t = 0; t < rows.size(); ++t) {
        double lhs = 0.0;
        for (std::size_t c = 0; c < d; ++c) lhs += rows[t][c] * (*x)[c];
        if (lhs < rhs[t] - 1e-9) return;
      }
      double obj = 0.0;
      for (double v : *x) obj += v;
      best = std::min(best, obj);
      return;
    }
    for (std::size_t t = start; t < rows.size(); ++t) {
      pick[k] = t;
      self(self, k + 1, t + 1);
    }
  };
  rec(rec, 0, 0);
  return best;
}

/// Every capacity-feasible integral assignment as per-seller sets.
inline std::vector<std::vector<Subset>> all_assignments(const Realization& r) {
  std::vector<std::vector<Subset>> out;
  std::vector<Subset> sets(r.m(), 0);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == r.n()) {
      out.push_back(sets);
      return;
    }
    self(self, i + 1);
    for (std::size_t j = 0; j < r.m(); ++j) {
      if (static_cast<std::size_t>(std::popcount(sets[j])) >= r.sellers[j].capacity) continue;
      sets[j] |= Subset{1} << i;
      self(self, i + 1);
      sets[j] &= ~(Subset{1} << i);
    }
  };
  rec(rec, 0);
  return out;
}

/// Scenario with every agent's prior collapsed onto one realization.
inline tscs::MarketScenario point_scenario(const Realization& r, std::vector<tscs::CostClass> classes) {
  tscs::MarketScenario s;
  s.n = r.n();
  s.m = r.m();
  for (const auto& b : r.buyers) s.buyer_priors.push_back({{1.0, b}});
  for (const auto& t : r.sellers) s.seller_priors.push_back({{1.0, t}});
  s.declared_class = std::move(classes);
  return s;
}

}  // namespace oracle
