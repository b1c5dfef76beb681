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

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tscs/common.hpp"
#include "tscs/cost.hpp"
#include "tscs/market.hpp"
#include "tscs/simplex.hpp"
#include "tscs/welfare.hpp"

namespace tscs {

/// Buyer utilities y and seller utilities z of the covering LP
///   min sum y + sum z  s.t.  sum_{i in S} y_i + z_j >= V_j(S),  y, z >= 0.
struct DualSolution {
  std::vector<double> y;
  std::vector<double> z;
  double objective = 0.0;
  std::size_t rounds = 0;  ///< cutting-plane rounds used
};

/// Utilities in the alpha-core summing to the integral optimum.
struct CoreUtilities {
  std::vector<double> y;
  std::vector<double> z;
  double alpha = 1.0;
  double welfare = 0.0;       ///< W, integral optimum
  double welfare_star = 0.0;  ///< W*, fractional optimum
};

/// A violated covering constraint or a negative utility.
struct DualViolation {
  enum class Kind { coalition, negative_buyer, negative_seller };
  Kind kind = Kind::coalition;
  std::size_t seller = 0;
  Subset set = 0;
  std::size_t buyer = 0;
  double slack = 0.0;  ///< lhs - rhs, negative
};

namespace detail {

/// min over S (|S| <= k_j) of c_j(S) - sum_{i in S}(v_ij - y_i) + z_j.
inline SetFunctionMin seller_separation(const Realization& r, std::size_t j, std::span<const double> y, double zj,
                                        bool submodular_path) {
  const std::size_t n = r.n();
  auto f = [&](Subset s) {
    double v = r.cost(j, s) + zj;
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(s, i)) v -= r.value(i, j) - y[i];
    }
    return v;
  };
  if (submodular_path && r.capacity(j) == n) return minimize_submodular(f, n);
  SetFunctionMin best{0, f(0)};
  for (Subset s = 1; s <= full_set(n); ++s) {
    if (cardinality(s) <= r.capacity(j)) {
      const double v = f(s);
      if (v < best.minimum - 1e-12) best = {s, v};
    }
    if (s == full_set(n)) break;
  }
  return best;
}

}  // namespace detail

/// Most violated dual constraint at (y, z), if any. For sellers declared in a
/// submodular class (NGS and additive included) and uncapacitated, the
/// rewritten constraint c_j(S) - sum (v_ij - y_i) + z_j >= 0 is checked by
/// submodular minimization; otherwise by scanning sets within capacity.
inline std::optional<DualViolation> separation_oracle(std::span<const double> y, std::span<const double> z,
                                                      const Realization& r, std::span<const CostClass> classes = {}) {
  std::optional<DualViolation> worst;
  auto consider = [&worst](DualViolation v) {
    if (v.slack < -kTol && (!worst || v.slack < worst->slack - 1e-15)) worst = v;
  };
  for (std::size_t i = 0; i < r.n(); ++i) consider({DualViolation::Kind::negative_buyer, 0, 0, i, y[i]});
  for (std::size_t j = 0; j < r.m(); ++j) consider({DualViolation::Kind::negative_seller, j, 0, 0, z[j]});
  if (worst) return worst;
  for (std::size_t j = 0; j < r.m(); ++j) {
    const bool submodular_path = j < classes.size() && is_submodular_class(classes[j]);
    const auto min = detail::seller_separation(r, j, y, z[j], submodular_path);
    if (min.minimizer != 0) consider({DualViolation::Kind::coalition, j, min.minimizer, 0, min.minimum});
  }
  return worst;
}

/// Cutting-plane solution of the covering LP: repeatedly solve the LP
/// restricted to the generated constraints (through its primal, whose row
/// prices are the restricted optimum) and add each seller's most violated
/// constraint until the separation oracle reports none. Constraints are kept
/// sorted by (seller, bitmask), so the Bland pivots make the result
/// deterministic.
inline DualSolution solve_dual(const Realization& r, std::span<const CostClass> classes = {},
                               std::size_t cap = Caps{}.lp_columns) {
  const std::size_t n = r.n();
  const std::size_t m = r.m();
  require_buyers(n);
  std::size_t universe = 0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 1; k <= r.capacity(j); ++k) {
      // binomial(n, k), small n
      std::size_t b = 1;
      for (std::size_t t = 0; t < k; ++t) b = b * (n - t) / (t + 1);
      universe += b;
    }
  }
  if (universe > cap) throw SizeError("covering LP has " + std::to_string(universe) + " constraints; cap is " + std::to_string(cap));

  std::vector<std::pair<std::size_t, Subset>> cuts;
  DualSolution d;
  d.y.assign(n, 0.0);
  d.z.assign(m, 0.0);
  for (std::size_t round = 0; round <= universe + 1; ++round) {
    d.rounds = round;
    if (!cuts.empty()) {
      lp::Problem p;
      p.objective.reserve(cuts.size());
      p.rows.assign(m + n, lp::Constraint{std::vector<double>(cuts.size(), 0.0), lp::Sense::le, 1.0});
      for (std::size_t c = 0; c < cuts.size(); ++c) {
        const auto [j, s] = cuts[c];
        p.objective.push_back(r.local_welfare(j, s));
        p.rows[j].coeffs[c] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (contains(s, i)) p.rows[m + i].coeffs[c] = 1.0;
        }
      }
      const auto sol = lp::maximize(p);
      if (sol.status != lp::Status::optimal) throw Error("restricted covering LP did not reach an optimum");
      for (std::size_t j = 0; j < m; ++j) d.z[j] = std::max(0.0, sol.duals[j]);
      for (std::size_t i = 0; i < n; ++i) d.y[i] = std::max(0.0, sol.duals[m + i]);
    }
    std::size_t added = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const bool submodular_path = j < classes.size() && is_submodular_class(classes[j]);
      const auto min = detail::seller_separation(r, j, d.y, d.z[j], submodular_path);
      if (min.minimizer == 0 || min.minimum >= -kTol) continue;
      const std::pair<std::size_t, Subset> cut{j, min.minimizer};
      const auto pos = std::lower_bound(cuts.begin(), cuts.end(), cut);
      if (pos != cuts.end() && *pos == cut) {
        throw Error("cutting-plane loop regenerated constraint (" + std::to_string(j) + ", " +
                    std::to_string(min.minimizer) + "); numerical stall");
      }
      cuts.insert(pos, cut);
      ++added;
    }
    if (added == 0) {
      d.objective = 0.0;
      for (double v : d.y) d.objective += v;
      for (double v : d.z) d.objective += v;
      return d;
    }
  }
  throw Error("cutting-plane loop did not terminate");
}

/// CORE-ALG: the covering LP optimum scaled by W / W*. Alpha is the realized
/// ratio W* / W. When W* vanishes every utility is zero.
inline CoreUtilities core_utilities(const Realization& r, double welfare, std::span<const CostClass> classes = {}) {
  const DualSolution d = solve_dual(r, classes);
  CoreUtilities out;
  out.welfare = welfare;
  out.welfare_star = d.objective;
  if (d.objective <= 1e-12) {
    out.y.assign(r.n(), 0.0);
    out.z.assign(r.m(), 0.0);
    out.alpha = 1.0;
    return out;
  }
  if (welfare > d.objective + 1e-9) {
    throw DomainError("integral welfare " + std::to_string(welfare) + " exceeds the fractional optimum " +
                      std::to_string(d.objective));
  }
  if (welfare <= 1e-12) throw DomainError("integral welfare vanishes while the fractional optimum is positive");
  const double scale = welfare / d.objective;
  out.y = d.y;
  out.z = d.z;
  for (double& v : out.y) v *= scale;
  for (double& v : out.z) v *= scale;
  out.alpha = std::abs(d.objective - welfare) <= 1e-12 ? 1.0 : std::max(1.0, d.objective / welfare);
  return out;
}

/// Coalition with its welfare and (unscaled) total utility.
struct CoalitionWitness {
  Subset buyers = 0;
  Subset sellers = 0;
  double welfare = 0.0;
  double utility = 0.0;
};

struct CoreCheck {
  bool in_core = true;
  double sum_error = 0.0;  ///< (sum y + sum z) - W
  std::optional<CoalitionWitness> witness;
  explicit operator bool() const { return in_core; }
};

/// alpha-core membership: utilities sum to the realized optimum and no
/// single-seller coalition produces more than alpha times its utility.
/// Coalitions with several sellers reduce to these, since a coalition's
/// improvement splits into per-seller improvements.
inline CoreCheck verify_core(std::span<const double> y, std::span<const double> z, const Realization& r, double alpha) {
  CoreCheck out;
  const double w = optimal_assignment_exhaustive(r).welfare;
  double total = 0.0;
  for (double v : y) total += v;
  for (double v : z) total += v;
  out.sum_error = total - w;
  if (std::abs(out.sum_error) > 1e-6) out.in_core = false;

  double worst = kTol;
  auto consider = [&](Subset buyers, Subset sellers, double welfare, double utility) {
    const double excess = welfare - alpha * utility;
    if (excess > worst) {
      worst = excess;
      out.in_core = false;
      out.witness = CoalitionWitness{buyers, sellers, welfare, utility};
    }
  };
  for (std::size_t i = 0; i < r.n(); ++i) consider(singleton(i), 0, 0.0, y[i]);
  for (std::size_t j = 0; j < r.m(); ++j) {
    for (Subset s = 0; s <= full_set(r.n()); ++s) {
      if (cardinality(s) <= r.capacity(j)) {
        double u = z[j];
        for (std::size_t i = 0; i < r.n(); ++i) {
          if (contains(s, i)) u += y[i];
        }
        consider(s, singleton(j), r.local_welfare(j, s), u);
      }
      if (s == full_set(r.n())) break;
    }
  }
  return out;
}

/// Best welfare every coalition can produce on its own: table[T][B] for
/// seller subset T and buyer subset B, built seller by seller with the
/// subset convolution g'(B) = max_{S subset B, |S| <= k_j} g(B \ S) + V_j(S).
inline std::vector<std::vector<double>> coalition_welfare_table(const Realization& r) {
  const std::size_t n = r.n();
  const std::size_t m = r.m();
  require_buyers(n);
  if (m > 16) throw SizeError("coalition table supports at most 16 sellers");
  const std::size_t nb = std::size_t{1} << n;
  std::vector<std::vector<double>> local(m, std::vector<double>(nb));
  for (std::size_t j = 0; j < m; ++j) {
    for (Subset s = 0; s < nb; ++s) {
      local[j][s] = cardinality(s) <= r.capacity(j) ? r.local_welfare(j, s) : -std::numeric_limits<double>::infinity();
    }
  }
  std::vector<std::vector<double>> table(std::size_t{1} << m, std::vector<double>(nb, 0.0));
  for (std::size_t t = 1; t < table.size(); ++t) {
    const std::size_t j = static_cast<std::size_t>(std::countr_zero(t));
    const auto& prev = table[t & (t - 1)];
    auto& cur = table[t];
    for (Subset b = 0; b < nb; ++b) {
      double best = prev[b];
      for (Subset s = b; s != 0; s = (s - 1) & b) best = std::max(best, prev[b & ~s] + local[j][s]);
      cur[b] = best;
    }
  }
  return table;
}

/// alpha-core check over every coalition of buyers and sellers, without the
/// single-seller reduction.
inline CoreCheck verify_core_all_coalitions(std::span<const double> y, std::span<const double> z, const Realization& r,
                                            double alpha) {
  CoreCheck out;
  const auto table = coalition_welfare_table(r);
  const Subset everyone = full_set(r.n());
  double total = 0.0;
  for (double v : y) total += v;
  for (double v : z) total += v;
  out.sum_error = total - table.back()[everyone];
  if (std::abs(out.sum_error) > 1e-6) out.in_core = false;
  double worst = kTol;
  for (std::size_t t = 0; t < table.size(); ++t) {
    double zt = 0.0;
    for (std::size_t j = 0; j < r.m(); ++j) {
      if ((t >> j) & 1u) zt += z[j];
    }
    for (Subset b = 0; b <= everyone; ++b) {
      double u = zt;
      for (std::size_t i = 0; i < r.n(); ++i) {
        if (contains(b, i)) u += y[i];
      }
      const double excess = table[t][b] - alpha * u;
      if (excess > worst) {
        worst = excess;
        out.in_core = false;
        out.witness = CoalitionWitness{b, static_cast<Subset>(t), table[t][b], u};
      }
      if (b == everyone) break;
    }
  }
  return out;
}

}  // namespace tscs
