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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tscs/common.hpp"
#include "tscs/market.hpp"
#include "tscs/simplex.hpp"
#include "tscs/welfare.hpp"

namespace tscs {

/// Monotone closure of the seller-local welfare: the best V_j over subsets of S.
inline double vhat(std::size_t j, Subset s, const Realization& r) {
  double best = 0.0;  // S' = empty
  for (Subset t = s; t != 0; t = (t - 1) & s) {
    if (cardinality(t) <= r.capacity(j)) best = std::max(best, r.local_welfare(j, t));
  }
  return best;
}

/// Smallest-bitmask maximizer of V_j over subsets of S. A smaller bitmask
/// never contains a larger one, so the result is also inclusion-minimal.
inline Subset prune_to_minimal(std::size_t j, Subset s, const Realization& r) {
  Subset best = 0;
  double best_value = 0.0;
  for (Subset t = s; t != 0; t = (t - 1) & s) {
    if (cardinality(t) > r.capacity(j)) continue;
    const double v = r.local_welfare(j, t);
    if (v > best_value + 1e-12 || (v >= best_value - 1e-12 && t < best)) {
      best = t;
      best_value = v;
    }
  }
  // The empty set ties with any zero-welfare subset and has the smallest mask.
  if (best_value <= 1e-12) return 0;
  return best;
}

/// The assignment LP with every V_j replaced by its monotone closure.
inline FractionalAllocation solve_primal_lp_vhat(const Realization& r) {
  return solve_primal_lp(r, [&r](std::size_t j, Subset s) { return vhat(j, s, r); });
}

struct LotteryAtom {
  double weight = 0.0;
  Assignment assignment;
};

/// Convex combination of integral assignments whose marginals equal x*/gamma.
struct Lottery {
  std::vector<LotteryAtom> atoms;
  double gamma = 1.0;      ///< scale actually used
  double gamma_min = 1.0;  ///< smallest scale the instance admits
  /// Columns of x* carrying weight, and for each one a weight w_c such that
  /// every integral assignment a has w . a <= (w . x*) / gamma_min. This
  /// certifies that no smaller scale is feasible.
  std::vector<Column> support;
  std::vector<double> certificate;

  /// Probability that seller j serves exactly S.
  double marginal(std::size_t j, Subset s) const {
    double total = 0.0;
    for (const auto& a : atoms) {
      if (a.assignment.set(j) == s) total += a.weight;
    }
    return total;
  }
};

class DecompositionFailure : public Error {
 public:
  DecompositionFailure(const std::string& what, std::vector<double> cert) : Error(what), certificate(std::move(cert)) {}
  std::vector<double> certificate;
};

/// Exact decomposition of x*/gamma into integral assignments. Enumerates the
/// assignments built from support columns (any other atom would need weight
/// zero), then maximizes t = 1/gamma subject to sum_l lambda_l a_l = t x*,
/// sum_l lambda_l = 1, lambda >= 0, t <= 1. The empty assignment is always an
/// atom, so any gamma above the minimum is reached by moving weight onto it.
///
/// With `gamma` unset the minimal gamma is used; otherwise the requested one,
/// which must not be below the minimum.
inline Lottery decompose(const FractionalAllocation& x, const Realization& r, std::optional<double> gamma = std::nullopt,
                         std::optional<double> gamma_max = std::nullopt, std::size_t cap = Caps{}.lottery_atoms) {
  const std::size_t n = r.n();
  const std::size_t m = r.m();
  const double limit = gamma_max.value_or(4.0 * std::sqrt(static_cast<double>(m)));

  Lottery out;
  out.support = x.support(1e-10);
  const std::size_t nc = out.support.size();

  // Atoms as lists of support-column indices, one column per seller at most,
  // pairwise disjoint. Depth-first with "seller idle" first.
  std::vector<std::vector<std::size_t>> atoms;
  std::vector<std::size_t> chosen;
  auto extend = [&](auto&& self, std::size_t j, Subset used) -> void {
    if (j == m) {
      if (atoms.size() >= cap) throw SizeError("lottery atom enumeration exceeds the cap of " + std::to_string(cap));
      atoms.push_back(chosen);
      return;
    }
    self(self, j + 1, used);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& col = out.support[c];
      if (col.seller != j || (col.set & used) != 0) continue;
      chosen.push_back(c);
      self(self, j + 1, used | col.set);
      chosen.pop_back();
    }
  };
  extend(extend, 0, 0);

  const std::size_t na = atoms.size();
  lp::Problem p;
  p.objective.assign(na + 1, 0.0);
  p.objective[na] = 1.0;
  p.rows.assign(nc, lp::Constraint{std::vector<double>(na + 1, 0.0), lp::Sense::eq, 0.0});
  for (std::size_t l = 0; l < na; ++l) {
    for (std::size_t c : atoms[l]) p.rows[c].coeffs[l] = 1.0;
  }
  for (std::size_t c = 0; c < nc; ++c) p.rows[c].coeffs[na] = -out.support[c].weight;
  lp::Constraint convex{std::vector<double>(na + 1, 1.0), lp::Sense::eq, 1.0};
  convex.coeffs[na] = 0.0;
  p.rows.push_back(std::move(convex));
  lp::Constraint bound{std::vector<double>(na + 1, 0.0), lp::Sense::le, 1.0};
  bound.coeffs[na] = 1.0;
  p.rows.push_back(std::move(bound));

  const auto sol = lp::maximize(p);
  if (sol.status != lp::Status::optimal) throw Error("lottery LP did not reach an optimum");
  const double t = sol.x[na];
  out.certificate.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) out.certificate[c] = -sol.duals[c];
  if (t <= 1e-12) throw DecompositionFailure("lottery LP admits no positive scale", out.certificate);
  out.gamma_min = std::max(1.0, 1.0 / t);
  if (out.gamma_min > limit + 1e-9) {
    throw DecompositionFailure("minimal scale " + std::to_string(out.gamma_min) + " exceeds the cap " +
                                   std::to_string(limit),
                               out.certificate);
  }
  out.gamma = gamma.value_or(out.gamma_min);
  if (out.gamma < out.gamma_min - 1e-9) {
    throw DecompositionFailure("requested scale " + std::to_string(out.gamma) + " is below the minimal scale " +
                                   std::to_string(out.gamma_min),
                               out.certificate);
  }
  const double shrink = std::min(1.0, (1.0 / out.gamma) / t);
  std::vector<double> weight(na);
  for (std::size_t l = 0; l < na; ++l) weight[l] = std::max(0.0, sol.x[l]) * shrink;
  double total = 0.0;
  for (double w : weight) total += w;
  weight[0] += 1.0 - total;  // atom 0 is the empty assignment

  for (std::size_t l = 0; l < na; ++l) {
    if (weight[l] <= 1e-12) continue;
    std::vector<Subset> sets(m, 0);
    for (std::size_t c : atoms[l]) sets[out.support[c].seller] = out.support[c].set;
    out.atoms.push_back({weight[l], Assignment::from_sets(std::move(sets), n)});
  }
  return out;
}

/// Replaces every atom's seller sets by their pruned minimal subsets.
inline Lottery prune_lottery(Lottery lottery, const Realization& r) {
  for (auto& atom : lottery.atoms) {
    std::vector<Subset> sets = atom.assignment.sets();
    for (std::size_t j = 0; j < sets.size(); ++j) sets[j] = prune_to_minimal(j, sets[j], r);
    atom.assignment = Assignment::from_sets(std::move(sets), r.n());
  }
  return lottery;
}

}  // namespace tscs
