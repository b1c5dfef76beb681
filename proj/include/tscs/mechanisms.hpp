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
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tscs/common.hpp"
#include "tscs/core.hpp"
#include "tscs/lottery.hpp"
#include "tscs/market.hpp"
#include "tscs/welfare.hpp"

namespace tscs {

enum class MechanismKind { exact = 1, sampled = 2, lottery = 3 };

/// Which per-realization utilities the pre-processing averages: the core
/// utilities (covering-LP optimum scaled to the integral welfare) for the
/// exact-allocation mechanisms, the raw covering-LP optimum for the lottery
/// mechanism.
enum class CoreSource { scaled_core, raw_dual };

/// Averaged per-agent utilities that parameterize the prices and wages.
struct ExpectedCoreUtilities {
  enum class Mode { exact, sampled };

  std::vector<double> y_bar;
  std::vector<double> z_bar;
  Mode mode = Mode::exact;
  CoreSource source = CoreSource::scaled_core;
  double epsilon = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool conformant = true;  ///< false when the sample count was overridden
  double shift = 0.0;      ///< epsilon / (n+m)^2 when sampled
  double alpha = 1.0;      ///< largest realized W*/W among averaged realizations
  std::size_t distinct_realizations = 0;
};

/// Per-realization output of CORE-ALG (or the raw covering LP).
struct RealizationCore {
  std::vector<double> y;
  std::vector<double> z;
  double alpha = 1.0;
  double welfare = 0.0;
  double welfare_star = 0.0;
};

inline RealizationCore realization_core(const Realization& r, const std::vector<CostClass>& classes, CoreSource source) {
  if (source == CoreSource::raw_dual) {
    const DualSolution d = solve_dual(r, classes);
    return {d.y, d.z, 1.0, d.objective, d.objective};
  }
  const double w = optimal_assignment_exhaustive(r).welfare;
  const CoreUtilities c = core_utilities(r, w, classes);
  return {c.y, c.z, c.alpha, c.welfare, c.welfare_star};
}

/// y_bar_i = sum_r q_r y_i^r over the full enumeration.
inline ExpectedCoreUtilities precompute_exact(const MarketScenario& s, CoreSource source = CoreSource::scaled_core,
                                              std::size_t threads = 0, const Caps& caps = {}) {
  const auto realizations = enumerate_realizations(s, caps.realizations);
  std::vector<RealizationCore> cores(realizations.size());
  parallel_blocks(realizations.size(), resolve_threads(threads), [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t k = b; k < e; ++k) cores[k] = realization_core(realizations[k], s.declared_class, source);
  });
  ExpectedCoreUtilities out;
  out.mode = ExpectedCoreUtilities::Mode::exact;
  out.source = source;
  out.y_bar.assign(s.n, 0.0);
  out.z_bar.assign(s.m, 0.0);
  out.distinct_realizations = realizations.size();
  for (std::size_t k = 0; k < realizations.size(); ++k) {
    const double q = realizations[k].probability;
    for (std::size_t i = 0; i < s.n; ++i) out.y_bar[i] += q * cores[k].y[i];
    for (std::size_t j = 0; j < s.m; ++j) out.z_bar[j] += q * cores[k].z[j];
    out.alpha = std::max(out.alpha, cores[k].alpha);
  }
  return out;
}

/// c = n^2 (n+m)^5 / epsilon^3, rounded up.
inline std::size_t conformant_sample_count(std::size_t n, std::size_t m, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double nm = static_cast<double>(n + m);
  const double c = static_cast<double>(n) * static_cast<double>(n) * std::pow(nm, 5) / (epsilon * epsilon * epsilon);
  // Absorb the rounding of the division so integral values stay integral.
  const double rounded = std::ceil(c * (1.0 - 1e-12));
  if (!std::isfinite(rounded) || rounded > 9.0e18) {
    throw SizeError("conformant sample count " + std::to_string(c) +
                    " overflows a machine integer; pass an explicit sample count");
  }
  return static_cast<std::size_t>(rounded);
}

/// Support index drawn for `agent` in sample `index`.
inline std::size_t draw_type(const MarketScenario& s, std::uint64_t seed, std::size_t agent, std::uint64_t index) {
  const double u = counter_uniform(seed, agent, index);
  const std::size_t k = s.support_size(agent);
  double cumulative = 0.0;
  for (std::size_t t = 0; t + 1 < k; ++t) {
    cumulative += s.probability(agent, t);
    if (u < cumulative) return t;
  }
  return k - 1;
}

/// Sampled pre-processing. Sample k draws agent a's type from the stream
/// (seed, a, k), so samples are independent of the worker count. Samples are
/// tallied per distinct realization; CORE-ALG is deterministic, so it runs
/// once per distinct realization and the average is
///   y_bar_i = sum_r (count_r / c) y_i^r + epsilon / (n+m)^2.
inline ExpectedCoreUtilities precompute_sampled(const MarketScenario& s, double epsilon, std::uint64_t seed,
                                                std::optional<std::size_t> sample_override = std::nullopt,
                                                CoreSource source = CoreSource::scaled_core, std::size_t threads = 0) {
  validate(s);
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const std::size_t c = sample_override.value_or(conformant_sample_count(s.n, s.m, epsilon));
  if (c == 0) throw DomainError("sample count must be positive");

  using Tally = std::map<std::vector<std::size_t>, std::uint64_t>;
  const std::size_t workers = resolve_threads(threads);
  std::vector<Tally> partial(std::max<std::size_t>(1, std::min(workers, c)));
  parallel_blocks(c, workers, [&](std::size_t b, std::size_t e, std::size_t w) {
    std::vector<std::size_t> index(s.num_agents());
    for (std::size_t k = b; k < e; ++k) {
      for (std::size_t a = 0; a < s.num_agents(); ++a) index[a] = draw_type(s, seed, a, k);
      ++partial[w][index];
    }
  });
  Tally tally;
  for (const auto& p : partial) {
    for (const auto& [key, count] : p) tally[key] += count;
  }

  ExpectedCoreUtilities out;
  out.mode = ExpectedCoreUtilities::Mode::sampled;
  out.source = source;
  out.epsilon = epsilon;
  out.samples = c;
  out.seed = seed;
  out.conformant = !sample_override.has_value();
  const double nm = static_cast<double>(s.n + s.m);
  out.shift = epsilon / (nm * nm);
  out.y_bar.assign(s.n, 0.0);
  out.z_bar.assign(s.m, 0.0);
  out.distinct_realizations = tally.size();
  for (const auto& [key, count] : tally) {
    const Realization r = make_realization(s, key);
    const RealizationCore core = realization_core(r, s.declared_class, source);
    const double weight = static_cast<double>(count) / static_cast<double>(c);
    for (std::size_t i = 0; i < s.n; ++i) out.y_bar[i] += weight * core.y[i];
    for (std::size_t j = 0; j < s.m; ++j) out.z_bar[j] += weight * core.z[j];
    out.alpha = std::max(out.alpha, core.alpha);
  }
  for (double& v : out.y_bar) v += out.shift;
  for (double& v : out.z_bar) v += out.shift;
  return out;
}

/// Allocation (a lottery; a single atom for the exact-allocation mechanisms),
/// prices, wages, and the utilities of truthful reporters.
struct MechanismOutcome {
  std::vector<LotteryAtom> lottery;
  std::vector<double> prices;
  std::vector<double> wages;
  std::vector<double> buyer_utility;
  std::vector<double> seller_utility;
  double welfare = 0.0;  ///< lottery-expected welfare under the reports
  double gamma = 1.0;

  std::size_t n() const { return prices.size(); }
  std::size_t m() const { return wages.size(); }

  /// Deterministic assignment of a single-atom outcome.
  const Assignment& assignment() const { return lottery.front().assignment; }

  /// Lottery-expected utility of buyer i whose true values are `truth`.
  double buyer_utility_for(std::size_t i, const BuyerType& truth) const {
    double value = 0.0;
    for (const auto& atom : lottery) {
      const int j = atom.assignment.sigma(i);
      if (j != Assignment::kUnserved) value += atom.weight * truth.values[static_cast<std::size_t>(j)];
    }
    return value - prices[i];
  }

  /// Lottery-expected utility of seller j whose true cost is `truth`.
  double seller_utility_for(std::size_t j, const SellerType& truth) const {
    double cost = 0.0;
    for (const auto& atom : lottery) cost += atom.weight * truth.cost(atom.assignment.set(j));
    return wages[j] - cost;
  }

  double budget_surplus() const {
    double total = 0.0;
    for (double p : prices) total += p;
    for (double w : wages) total -= w;
    return total;
  }
};

namespace detail {

inline void fill_utilities(MechanismOutcome& out, const Realization& r) {
  out.buyer_utility.resize(r.n());
  out.seller_utility.resize(r.m());
  for (std::size_t i = 0; i < r.n(); ++i) out.buyer_utility[i] = out.buyer_utility_for(i, r.buyers[i]);
  for (std::size_t j = 0; j < r.m(); ++j) out.seller_utility[j] = out.seller_utility_for(j, r.sellers[j]);
  out.welfare = 0.0;
  for (const auto& atom : out.lottery) out.welfare += atom.weight * realization_welfare(r, atom.assignment);
}

/// Prices and wages shared by the exact-allocation mechanisms.
inline MechanismOutcome vcg_style_outcome(const Realization& r, const Assignment& a, const ExpectedCoreUtilities& e) {
  const std::size_t n = r.n();
  const std::size_t m = r.m();
  std::vector<double> value(n, 0.0), cost(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int j = a.sigma(i);
    if (j != Assignment::kUnserved) value[i] = r.value(i, static_cast<std::size_t>(j));
  }
  for (std::size_t j = 0; j < m; ++j) cost[j] = r.cost(j, a.set(j));

  MechanismOutcome out;
  out.lottery = {{1.0, a}};
  out.prices.assign(n, 0.0);
  out.wages.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double p = 0.0;
    for (std::size_t j = 0; j < m; ++j) p += cost[j];
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) p += e.y_bar[k] - value[k];
    }
    for (std::size_t j = 0; j < m; ++j) p += e.z_bar[j];
    out.prices[i] = p;
  }
  for (std::size_t j = 0; j < m; ++j) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) w += value[i] - e.y_bar[i];
    for (std::size_t k = 0; k < m; ++k) {
      if (k != j) w -= cost[k] + e.z_bar[k];
    }
    out.wages[j] = w;
  }
  fill_utilities(out, r);
  return out;
}

}  // namespace detail

/// Mechanism 1: exhaustive welfare-maximizing allocation; buyer i pays
///   sum_j c_j(S_j) - sum_{i' != i} v_{i' sigma(i')} + sum_{i' != i} y_i' + sum_j z_j
/// and seller j receives
///   sum_i v_{i sigma(i)} - sum_{j' != j} c_j'(S_j') - sum_i y_i - sum_{j' != j} z_j'.
inline MechanismOutcome mech1_prices_wages(const Realization& reported, const ExpectedCoreUtilities& expected) {
  return detail::vcg_style_outcome(reported, optimal_assignment_exhaustive(reported).assignment, expected);
}

/// Mechanism 2: same prices and wages with sampled utilities; the allocation
/// comes from the polynomial-time WELFARE-ALG of the declared classes.
inline MechanismOutcome mech2_prices_wages(const Realization& reported, const ExpectedCoreUtilities& expected,
                                           const std::vector<CostClass>& classes) {
  return detail::vcg_style_outcome(reported, welfare_alg(reported, classes).assignment, expected);
}

/// Mechanism 3: lottery over pruned integral assignments with marginals
/// x*/gamma; prices and wages are the 1/gamma-scaled formulas evaluated on
/// the extracted values v_i(x*) and incurred costs c_j(x*).
inline MechanismOutcome mech3_run(const Realization& reported, const ExpectedCoreUtilities& expected, double gamma) {
  const std::size_t n = reported.n();
  const std::size_t m = reported.m();
  const FractionalAllocation x = solve_primal_lp(reported);
  Lottery lottery = prune_lottery(decompose(x, reported, gamma, std::max(gamma, 4.0 * std::sqrt(double(m)))), reported);

  std::vector<double> vx(n, 0.0), cx(m, 0.0);
  for (const auto& col : x.columns) {
    if (col.weight == 0.0) continue;
    cx[col.seller] += col.weight * reported.cost(col.seller, col.set);
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(col.set, i)) vx[i] += col.weight * reported.value(i, col.seller);
    }
  }

  MechanismOutcome out;
  out.gamma = gamma;
  out.lottery = std::move(lottery.atoms);
  out.prices.assign(n, 0.0);
  out.wages.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double p = 0.0;
    for (std::size_t j = 0; j < m; ++j) p += cx[j] + expected.z_bar[j];
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) p += expected.y_bar[k] - vx[k];
    }
    out.prices[i] = p / gamma;
  }
  for (std::size_t j = 0; j < m; ++j) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) w += vx[i] - expected.y_bar[i];
    for (std::size_t k = 0; k < m; ++k) {
      if (k != j) w -= cx[k] + expected.z_bar[k];
    }
    out.wages[j] = w / gamma;
  }
  detail::fill_utilities(out, reported);
  return out;
}

struct MechanismParams {
  MechanismKind kind = MechanismKind::exact;
  double epsilon = 0.0;          ///< > 0 selects sampled pre-processing (required for kind 2)
  std::uint64_t seed = 0;
  std::optional<std::size_t> samples;  ///< overrides the conformant sample count
  std::optional<double> gamma;         ///< lottery scale; default: largest minimal scale over the prior
  std::size_t threads = 0;
  Caps caps;
};

/// A configured mechanism: the scenario it was designed for plus its
/// type-report-independent constants (averaged utilities, lottery scale).
class Mechanism {
 public:
  Mechanism(MarketScenario scenario, MechanismKind kind, ExpectedCoreUtilities expected, double gamma = 1.0)
      : scenario_(std::move(scenario)), kind_(kind), expected_(std::move(expected)), gamma_(gamma) {}

  MechanismKind kind() const { return kind_; }
  const MarketScenario& scenario() const { return scenario_; }
  const ExpectedCoreUtilities& expected() const { return expected_; }
  double gamma() const { return gamma_; }

  MechanismOutcome run(const Realization& reported) const {
    switch (kind_) {
      case MechanismKind::exact: return mech1_prices_wages(reported, expected_);
      case MechanismKind::sampled: return mech2_prices_wages(reported, expected_, scenario_.declared_class);
      case MechanismKind::lottery: return mech3_run(reported, expected_, gamma_);
    }
    throw DomainError("unknown mechanism");
  }

  /// Approximation factor of the core guarantee: realized alpha for the
  /// exact-allocation mechanisms, gamma for the lottery.
  double core_alpha() const { return kind_ == MechanismKind::lottery ? gamma_ : expected_.alpha; }

 private:
  MarketScenario scenario_;
  MechanismKind kind_;
  ExpectedCoreUtilities expected_;
  double gamma_;
};

/// Smallest lottery scale that works for every listed report.
inline double lottery_gamma(const std::vector<Realization>& reports) {
  double gamma = 1.0;
  for (const auto& r : reports) gamma = std::max(gamma, decompose(solve_primal_lp(r), r).gamma_min);
  return gamma;
}

inline Mechanism make_mechanism(const MarketScenario& s, const MechanismParams& params) {
  validate(s);
  const CoreSource source = params.kind == MechanismKind::lottery ? CoreSource::raw_dual : CoreSource::scaled_core;
  if (params.kind == MechanismKind::lottery) {
    for (auto c : s.declared_class) {
      if (!is_submodular_class(c)) throw ModelMismatch("the lottery mechanism needs sellers declared submodular");
    }
  }
  const bool sampled = params.kind == MechanismKind::sampled || (params.kind == MechanismKind::lottery && params.epsilon > 0.0);
  if (params.kind == MechanismKind::sampled && !(params.epsilon > 0.0)) {
    throw DomainError("the sampled mechanism needs epsilon > 0");
  }
  ExpectedCoreUtilities expected = sampled
      ? precompute_sampled(s, params.epsilon, params.seed, params.samples, source, params.threads)
      : precompute_exact(s, source, params.threads, params.caps);
  double gamma = 1.0;
  if (params.kind == MechanismKind::lottery) {
    gamma = params.gamma ? *params.gamma : lottery_gamma(enumerate_realizations(s, params.caps.realizations));
  }
  return Mechanism(s, params.kind, std::move(expected), gamma);
}

/// Exact expectations over the prior of everything the audits need, holding
/// the mechanism's constants fixed.
struct ExAnteReport {
  double expected_surplus = 0.0;  ///< E[sum p - sum w]
  std::vector<double> expected_utility;  ///< buyers then sellers
  std::vector<double> expected_price;
  std::vector<double> expected_wage;
  double expected_welfare = 0.0;          ///< of the mechanism
  double expected_optimal_welfare = 0.0;  ///< brute-force optimum
  double expected_fractional_welfare = 0.0;
  /// E[best welfare of coalition (T, B)], indexed [T][B].
  std::vector<std::vector<double>> coalition_welfare;
  double alpha = 1.0;
  double delta = 0.0;
  double gamma = 1.0;
  /// Denominators available for delta = 2 epsilon / W.
  double delta_with_optimal = 0.0;
  double delta_with_mechanism = 0.0;
  double min_core_slack = 0.0;
  CoalitionWitness core_witness;

  double core_multiplier() const { return alpha * (1.0 + delta); }
};

/// Minimum over coalitions of multiplier * U(coalition) - E[W(coalition)].
inline std::pair<double, CoalitionWitness> min_core_slack(const std::vector<std::vector<double>>& coalition_welfare,
                                                          const std::vector<double>& utility, std::size_t n,
                                                          std::size_t m, double multiplier,
                                                          bool single_seller_only = false) {
  double best = std::numeric_limits<double>::infinity();
  CoalitionWitness witness;
  const Subset everyone = full_set(n);
  for (std::size_t t = 0; t < coalition_welfare.size(); ++t) {
    const bool grand = t + 1 == coalition_welfare.size();
    const bool multi = std::popcount(t) > 1;
    if (single_seller_only && multi && !grand) continue;
    double ut = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if ((t >> j) & 1u) ut += utility[n + j];
    }
    for (Subset b = 0; b <= everyone; ++b) {
      // The fast path keeps only the grand coalition among multi-seller ones.
      if (!(single_seller_only && multi && b != everyone)) {
        double u = ut;
        for (std::size_t i = 0; i < n; ++i) {
          if (contains(b, i)) u += utility[i];
        }
        const double slack = multiplier * u - coalition_welfare[t][b];
        if (slack < best - 1e-15) {
          best = slack;
          witness = {b, static_cast<Subset>(t), coalition_welfare[t][b], u};
        }
      }
      if (b == everyone) break;
    }
  }
  return {best, witness};
}

inline ExAnteReport ex_ante_report(const Mechanism& mech, const Caps& caps = {}) {
  const MarketScenario& s = mech.scenario();
  const auto realizations = enumerate_realizations(s, caps.realizations);
  ExAnteReport rep;
  rep.expected_utility.assign(s.n + s.m, 0.0);
  rep.expected_price.assign(s.n, 0.0);
  rep.expected_wage.assign(s.m, 0.0);
  rep.coalition_welfare.assign(std::size_t{1} << s.m, std::vector<double>(std::size_t{1} << s.n, 0.0));
  for (const auto& r : realizations) {
    const double q = r.probability;
    const MechanismOutcome out = mech.run(r);
    rep.expected_surplus += q * out.budget_surplus();
    for (std::size_t i = 0; i < s.n; ++i) {
      rep.expected_utility[i] += q * out.buyer_utility[i];
      rep.expected_price[i] += q * out.prices[i];
    }
    for (std::size_t j = 0; j < s.m; ++j) {
      rep.expected_utility[s.n + j] += q * out.seller_utility[j];
      rep.expected_wage[j] += q * out.wages[j];
    }
    rep.expected_welfare += q * out.welfare;
    const auto table = coalition_welfare_table(r);
    for (std::size_t t = 0; t < table.size(); ++t) {
      for (std::size_t b = 0; b < table[t].size(); ++b) rep.coalition_welfare[t][b] += q * table[t][b];
    }
    rep.expected_optimal_welfare += q * table.back().back();
    if (mech.kind() == MechanismKind::lottery) rep.expected_fractional_welfare += q * solve_primal_lp(r).objective;
  }
  if (mech.kind() != MechanismKind::lottery) rep.expected_fractional_welfare = rep.expected_optimal_welfare;

  const auto& e = mech.expected();
  rep.alpha = mech.core_alpha();
  rep.gamma = mech.gamma();
  if (e.mode == ExpectedCoreUtilities::Mode::sampled) {
    if (rep.expected_optimal_welfare > 1e-12) rep.delta_with_optimal = 2.0 * e.epsilon / rep.expected_optimal_welfare;
    if (rep.expected_welfare > 1e-12) rep.delta_with_mechanism = 2.0 * e.epsilon / rep.expected_welfare;
    rep.delta = mech.kind() == MechanismKind::lottery ? rep.delta_with_mechanism : rep.delta_with_optimal;
  }
  const auto [slack, witness] = min_core_slack(rep.coalition_welfare, rep.expected_utility, s.n, s.m, rep.core_multiplier());
  rep.min_core_slack = slack;
  rep.core_witness = witness;
  return rep;
}

}  // namespace tscs
