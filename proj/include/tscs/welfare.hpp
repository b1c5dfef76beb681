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

#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tscs/common.hpp"
#include "tscs/cost.hpp"
#include "tscs/market.hpp"
#include "tscs/simplex.hpp"

namespace tscs {

struct WelfareResult {
  Assignment assignment;
  double welfare = 0.0;
};

/// Column x_{jS} of the assignment LP: seller j serves exactly S.
struct Column {
  std::size_t seller = 0;
  Subset set = 0;
  double weight = 0.0;
};

/// Fractional solution of the assignment LP. `columns` lists every variable in
/// LP order (sellers ascending, bitmask ascending within a seller); the empty
/// set has no column since leaving a seller idle is the slack of its row.
struct FractionalAllocation {
  std::vector<Column> columns;
  double objective = 0.0;

  double weight(std::size_t j, Subset s) const {
    for (const auto& c : columns) {
      if (c.seller == j && c.set == s) return c.weight;
    }
    return 0.0;
  }

  /// Columns with weight above `floor`.
  std::vector<Column> support(double floor = 1e-12) const {
    std::vector<Column> out;
    for (const auto& c : columns) {
      if (c.weight > floor) out.push_back(c);
    }
    return out;
  }
};

/// Raised when a declared-NGS instance has a fractional LP optimum.
class IntegralityFailure : public Error {
 public:
  IntegralityFailure(const std::string& what, FractionalAllocation x) : Error(what), allocation(std::move(x)) {}
  FractionalAllocation allocation;
};

/// Exhaustive search over all (m+1)^n capacity-feasible assignments. Words
/// are scanned in increasing lexicographic order (buyer 1 most significant,
/// unserved < seller 1 < ... < seller m); only a strict improvement replaces
/// the incumbent, so the smallest optimal word wins.
inline WelfareResult optimal_assignment_exhaustive(const Realization& r, std::size_t cap = Caps{}.assignments) {
  const std::size_t n = r.n();
  const std::size_t m = r.m();
  require_buyers(n);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > cap / (m + 1)) {
      throw SizeError("exhaustive assignment search exceeds the cap of " + std::to_string(cap) + " assignments");
    }
    total *= m + 1;
  }

  // Per-seller local welfare tables avoid recomputing sums per word.
  std::vector<std::vector<double>> local(m, std::vector<double>(std::size_t{1} << n));
  for (std::size_t j = 0; j < m; ++j) {
    for (Subset s = 0; s < local[j].size(); ++s) local[j][s] = r.local_welfare(j, s);
  }

  std::vector<std::size_t> digit(n, 0);
  std::vector<Subset> sets(m, 0), best_sets(m, 0);
  double best = 0.0;
  bool have = false;
  for (std::size_t k = 0; k < total; ++k) {
    std::fill(sets.begin(), sets.end(), Subset{0});
    for (std::size_t i = 0; i < n; ++i) {
      if (digit[i] > 0) sets[digit[i] - 1] |= singleton(i);
    }
    bool feasible = true;
    double w = 0.0;
    for (std::size_t j = 0; j < m && feasible; ++j) {
      if (cardinality(sets[j]) > r.capacity(j)) feasible = false;
      else w += local[j][sets[j]];
    }
    if (feasible && (!have || w > best + 1e-12)) {
      best = w;
      best_sets = sets;
      have = true;
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++digit[i] <= m) break;
      digit[i] = 0;
    }
  }
  return {Assignment::from_sets(best_sets, n), best};
}

/// Single uncapacitated submodular seller: the best set minimizes
/// c(S) - sum_{i in S} v_i.
inline WelfareResult optimal_assignment_single_seller(const Realization& r) {
  if (r.m() != 1) throw ModelMismatch("single-seller path needs exactly one seller");
  if (r.capacity(0) != r.n()) throw ModelMismatch("single-seller path needs an uncapacitated seller");
  if (!is_submodular(r.sellers[0].cost)) throw ModelMismatch("single-seller path needs a submodular cost");
  const auto min = minimize_submodular([&r](Subset s) { return -r.local_welfare(0, s); }, r.n());
  return {Assignment::from_sets({min.minimizer}, r.n()), -min.minimum};
}

/// Objective coefficient of column (j, S).
using ColumnValue = std::function<double(std::size_t, Subset)>;

/// Assignment LP over explicitly enumerated columns, solved by the Bland
/// simplex. `value` defaults to the seller-local welfare.
inline FractionalAllocation solve_primal_lp(const Realization& r, const ColumnValue& value = {},
                                            std::size_t cap = Caps{}.lp_columns) {
  const std::size_t n = r.n();
  const std::size_t m = r.m();
  require_buyers(n);
  std::size_t count = 0;
  for (std::size_t j = 0; j < m; ++j) {
    for (Subset s = 1; s <= full_set(n); ++s) {
      if (cardinality(s) <= r.capacity(j)) ++count;
      if (s == full_set(n)) break;
    }
  }
  if (count > cap) throw SizeError("assignment LP has " + std::to_string(count) + " columns; cap is " + std::to_string(cap));

  FractionalAllocation out;
  out.columns.reserve(count);
  lp::Problem p;
  p.objective.reserve(count);
  for (std::size_t j = 0; j < m; ++j) {
    for (Subset s = 1; s <= full_set(n); ++s) {
      if (cardinality(s) <= r.capacity(j)) {
        out.columns.push_back({j, s, 0.0});
        p.objective.push_back(value ? value(j, s) : r.local_welfare(j, s));
      }
      if (s == full_set(n)) break;
    }
  }
  // Seller rows first, then buyer rows: each seller serves at most one set
  // and each buyer is covered at most once.
  p.rows.assign(m + n, lp::Constraint{std::vector<double>(count, 0.0), lp::Sense::le, 1.0});
  for (std::size_t c = 0; c < count; ++c) {
    p.rows[out.columns[c].seller].coeffs[c] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(out.columns[c].set, i)) p.rows[m + i].coeffs[c] = 1.0;
    }
  }
  const auto sol = lp::maximize(p);
  if (sol.status != lp::Status::optimal) throw Error("assignment LP did not reach an optimum");
  for (std::size_t c = 0; c < count; ++c) out.columns[c].weight = sol.x[c];
  out.objective = sol.objective;
  return out;
}

/// NGS path: the LP optimum must be integral; the assignment is read off it.
inline WelfareResult optimal_assignment_ngs(const Realization& r) {
  auto x = solve_primal_lp(r);
  std::vector<Subset> sets(r.m(), 0);
  for (const auto& c : x.columns) {
    const bool zero = std::abs(c.weight) <= 1e-6;
    const bool one = std::abs(c.weight - 1.0) <= 1e-6;
    if (!zero && !one) {
      throw IntegralityFailure("assignment LP optimum is fractional (weight " + std::to_string(c.weight) +
                                   " on seller " + std::to_string(c.seller) + ", set " + std::to_string(c.set) +
                                   "); the declared NGS class does not hold",
                               std::move(x));
    }
    if (one) sets[c.seller] |= c.set;
  }
  Assignment a = Assignment::from_sets(std::move(sets), r.n());
  const double w = realization_welfare(r, a);
  return {std::move(a), w};
}

/// WELFARE-ALG dispatch for polynomial-time paths: single uncapacitated
/// submodular seller, all-NGS sellers via the LP, exhaustive otherwise.
inline WelfareResult welfare_alg(const Realization& r, std::span<const CostClass> classes) {
  if (r.m() == 1 && is_submodular_class(classes[0]) && r.capacity(0) == r.n()) {
    return optimal_assignment_single_seller(r);
  }
  bool all_ngs = true;
  for (auto c : classes) all_ngs = all_ngs && is_ngs_class(c);
  if (all_ngs) return optimal_assignment_ngs(r);
  return optimal_assignment_exhaustive(r);
}

}  // namespace tscs
