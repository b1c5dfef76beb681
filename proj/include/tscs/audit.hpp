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
#include <concepts>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tscs/common.hpp"
#include "tscs/core.hpp"
#include "tscs/market.hpp"
#include "tscs/mechanisms.hpp"

namespace tscs {

enum class Property { efficiency, dsic, ex_ante_ir, ex_ante_bb, ex_ante_wbb, core };

inline std::string_view to_string(Property p) {
  switch (p) {
    case Property::efficiency: return "efficiency";
    case Property::dsic: return "dsic";
    case Property::ex_ante_ir: return "ex_ante_ir";
    case Property::ex_ante_bb: return "ex_ante_bb";
    case Property::ex_ante_wbb: return "ex_ante_wbb";
    case Property::core: return "core";
  }
  return "unknown";
}

struct AuditResult {
  Property property = Property::efficiency;
  bool pass = true;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::string witness;
};

/// Anything that maps a reported realization to an outcome.
template <typename M>
concept OutcomeRule = requires(const M& mech, const Realization& r) {
  { mech.run(r) } -> std::convertible_to<MechanismOutcome>;
};

/// Candidate misreports per agent side.
struct MisreportUniverse {
  std::vector<BuyerType> buyers;
  std::vector<SellerType> sellers;
};

/// Every support type of every agent on the same side, plus each of them
/// with one coordinate moved by +-step (values clamped to [0,1], costs to
/// [0, inf)).
inline MisreportUniverse default_misreport_universe(const MarketScenario& s, double step = 0.05) {
  MisreportUniverse u;
  auto add_buyer = [&u](BuyerType b) {
    if (std::find(u.buyers.begin(), u.buyers.end(), b) == u.buyers.end()) u.buyers.push_back(std::move(b));
  };
  auto add_seller = [&u](SellerType t) {
    if (std::find(u.sellers.begin(), u.sellers.end(), t) == u.sellers.end()) u.sellers.push_back(std::move(t));
  };
  for (const auto& prior : s.buyer_priors) {
    for (const auto& atom : prior) add_buyer(atom.type);
  }
  for (const auto& prior : s.seller_priors) {
    for (const auto& atom : prior) add_seller(atom.type);
  }
  const auto base_buyers = u.buyers;
  for (const auto& b : base_buyers) {
    for (std::size_t j = 0; j < b.values.size(); ++j) {
      for (double d : {-step, step}) {
        BuyerType p = b;
        p.values[j] = std::clamp(p.values[j] + d, 0.0, 1.0);
        add_buyer(std::move(p));
      }
    }
  }
  const auto base_sellers = u.sellers;
  for (const auto& t : base_sellers) {
    const auto data = t.cost.data();
    const std::size_t first = t.cost.is_additive() ? 0 : 1;  // tabular entry 0 is the empty set
    for (std::size_t k = first; k < data.size(); ++k) {
      for (double d : {-step, step}) {
        SellerType p = t;
        p.cost = t.cost.with_entry(k, std::max(0.0, data[k] + d));
        add_seller(std::move(p));
      }
    }
  }
  return u;
}

inline Realization with_buyer(Realization r, std::size_t i, const BuyerType& b) {
  r.buyers[i] = b;
  r.support_index.clear();
  return r;
}

inline Realization with_seller(Realization r, std::size_t j, const SellerType& t) {
  r.sellers[j] = t;
  r.support_index.clear();
  return r;
}

namespace detail {

inline std::string agent_name(std::size_t agent, std::size_t n) {
  return agent < n ? "buyer " + std::to_string(agent + 1) : "seller " + std::to_string(agent - n + 1);
}

inline std::string describe_realization(const Realization& r) {
  std::ostringstream os;
  os << "realization [";
  for (std::size_t k = 0; k < r.support_index.size(); ++k) os << (k ? " " : "") << r.support_index[k];
  os << "]";
  return os.str();
}

inline std::string describe_buyer(const BuyerType& b) {
  std::ostringstream os;
  os.precision(6);
  os << "values(";
  for (std::size_t j = 0; j < b.values.size(); ++j) os << (j ? " " : "") << b.values[j];
  os << ")";
  return os.str();
}

inline std::string describe_seller(const SellerType& t) {
  std::ostringstream os;
  os.precision(6);
  os << (t.cost.is_additive() ? "additive(" : "table(");
  const auto data = t.cost.data();
  for (std::size_t k = 0; k < data.size(); ++k) os << (k ? " " : "") << data[k];
  os << ") capacity " << t.capacity;
  return os.str();
}

inline std::string describe_coalition(const CoalitionWitness& w, std::size_t n, std::size_t m) {
  std::ostringstream os;
  os << "coalition buyers{";
  bool first = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (contains(w.buyers, i)) {
      os << (first ? "" : " ") << i + 1;
      first = false;
    }
  }
  os << "} sellers{";
  first = true;
  for (std::size_t j = 0; j < m; ++j) {
    if (contains(w.sellers, j)) {
      os << (first ? "" : " ") << j + 1;
      first = false;
    }
  }
  os << "} welfare " << w.welfare << " utility " << w.utility;
  if (w.buyers == full_set(n) && w.sellers == full_set(m)) os << " (grand coalition)";
  return os.str();
}

}  // namespace detail

/// Every reported realization a DSIC audit will feed the mechanism: the
/// prior's realizations and each of them with one agent's type replaced by a
/// misreport.
inline std::vector<Realization> dsic_reports(const MarketScenario& s, const MisreportUniverse& u, const Caps& caps = {}) {
  std::vector<Realization> out;
  for (const auto& r : enumerate_realizations(s, caps.realizations)) {
    out.push_back(r);
    for (std::size_t i = 0; i < s.n; ++i) {
      for (const auto& b : u.buyers) {
        if (!(b == r.buyers[i])) out.push_back(with_buyer(r, i, b));
      }
    }
    for (std::size_t j = 0; j < s.m; ++j) {
      for (const auto& t : u.sellers) {
        if (!(t == r.sellers[j])) out.push_back(with_seller(r, j, t));
      }
    }
  }
  return out;
}

/// Max over (realization of the prior, agent, misreport) of the gain
/// u(misreport) - u(truth), both measured with the agent's true type. The
/// mechanism's constants stay fixed across all deviations. Passes iff the
/// gain never exceeds 1e-7; the witness is the first worst deviation in grid
/// order.
template <OutcomeRule M>
AuditResult audit_dsic(const MarketScenario& s, const M& mech, const MisreportUniverse& u, std::size_t threads = 0,
                       const Caps& caps = {}) {
  const auto realizations = enumerate_realizations(s, caps.realizations);
  struct Worst {
    double gain = -std::numeric_limits<double>::infinity();
    std::string witness;
  };
  std::vector<Worst> per(realizations.size());
  parallel_blocks(realizations.size(), resolve_threads(threads), [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t k = b; k < e; ++k) {
      const Realization& r = realizations[k];
      const MechanismOutcome truth = mech.run(r);
      Worst& w = per[k];
      auto consider = [&](double gain, std::size_t agent, const std::string& report) {
        if (gain > w.gain + 1e-15) {
          w.gain = gain;
          w.witness = detail::agent_name(agent, s.n) + " at " + detail::describe_realization(r) + " reports " + report +
                      " and gains " + std::to_string(gain);
        }
      };
      for (std::size_t i = 0; i < s.n; ++i) {
        const double honest = truth.buyer_utility_for(i, r.buyers[i]);
        for (const auto& lie : u.buyers) {
          if (lie == r.buyers[i]) continue;
          const double gain = mech.run(with_buyer(r, i, lie)).buyer_utility_for(i, r.buyers[i]) - honest;
          consider(gain, i, detail::describe_buyer(lie));
        }
      }
      for (std::size_t j = 0; j < s.m; ++j) {
        const double honest = truth.seller_utility_for(j, r.sellers[j]);
        for (const auto& lie : u.sellers) {
          if (lie == r.sellers[j]) continue;
          const double gain = mech.run(with_seller(r, j, lie)).seller_utility_for(j, r.sellers[j]) - honest;
          consider(gain, s.n + j, detail::describe_seller(lie));
        }
      }
    }
  });
  AuditResult res{Property::dsic, true, 0.0, 1e-7, ""};
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& w : per) {
    if (w.gain > worst + 1e-15) {
      worst = w.gain;
      res.witness = w.witness;
    }
  }
  res.worst_violation = std::max(0.0, worst);
  res.pass = res.worst_violation <= res.tolerance;
  if (res.pass) res.witness.clear();
  return res;
}

/// Ex-ante IR and budget balance from a report. Exact-utility mechanisms
/// need E[u] >= 0; sampled ones E[u] >= -epsilon. Mechanism 1 needs
/// |E[surplus]| <= 1e-6; the others only E[surplus] >= -1e-6.
inline std::vector<AuditResult> audit_ex_ante(const Mechanism& mech, const ExAnteReport& rep) {
  const auto& s = mech.scenario();
  const auto& e = mech.expected();
  std::vector<AuditResult> out;

  const double floor = e.mode == ExpectedCoreUtilities::Mode::sampled ? -e.epsilon : 0.0;
  AuditResult ir{Property::ex_ante_ir, true, 0.0, 1e-9, ""};
  for (std::size_t a = 0; a < rep.expected_utility.size(); ++a) {
    const double shortfall = floor - rep.expected_utility[a];
    if (shortfall > ir.worst_violation) {
      ir.worst_violation = shortfall;
      ir.witness = detail::agent_name(a, s.n) + " expects " + std::to_string(rep.expected_utility[a]);
    }
  }
  ir.pass = ir.worst_violation <= ir.tolerance;
  if (ir.pass) ir.witness.clear();
  out.push_back(ir);

  if (mech.kind() == MechanismKind::exact) {
    AuditResult bb{Property::ex_ante_bb, true, std::abs(rep.expected_surplus), 1e-6, ""};
    bb.pass = bb.worst_violation <= bb.tolerance;
    if (!bb.pass) bb.witness = "expected surplus " + std::to_string(rep.expected_surplus);
    out.push_back(bb);
  } else {
    AuditResult wbb{Property::ex_ante_wbb, true, std::max(0.0, -rep.expected_surplus), 1e-6, ""};
    wbb.pass = wbb.worst_violation <= wbb.tolerance;
    if (!wbb.pass) wbb.witness = "expected surplus " + std::to_string(rep.expected_surplus);
    out.push_back(wbb);
  }
  return out;
}

/// Core audit over expected coalition welfare and expected utilities:
/// passes iff no coalition's expected welfare exceeds multiplier times its
/// expected utility by more than 1e-6. `single_seller_only` restricts to
/// coalitions with at most one seller plus the grand coalition, which is
/// exact whenever the scenario has a single realization.
inline AuditResult audit_core_ex_ante(const std::vector<std::vector<double>>& coalition_welfare,
                                      const std::vector<double>& utility, std::size_t n, std::size_t m,
                                      double multiplier, bool single_seller_only = false) {
  const auto [slack, witness] = min_core_slack(coalition_welfare, utility, n, m, multiplier, single_seller_only);
  AuditResult res{Property::core, true, std::max(0.0, -slack), 1e-6, ""};
  res.pass = res.worst_violation <= res.tolerance;
  if (!res.pass) res.witness = detail::describe_coalition(witness, n, m);
  return res;
}

/// Core audit of a mechanism at multiplier alpha (1 + delta); the fast path
/// is taken only when the prior has a single realization.
inline AuditResult audit_core_ex_ante(const Mechanism& mech, const ExAnteReport& rep,
                                      std::optional<double> multiplier = std::nullopt) {
  const auto& s = mech.scenario();
  const bool single = realization_count(s, Caps{}.realizations) == 1;
  return audit_core_ex_ante(rep.coalition_welfare, rep.expected_utility, s.n, s.m,
                            multiplier.value_or(rep.core_multiplier()), single);
}

/// Ratio of expected mechanism welfare to the expected brute-force optimum.
/// Exact-allocation mechanisms need ratio 1 within 1e-9, the lottery
/// mechanism ratio >= 1/gamma - 1e-6.
inline AuditResult audit_efficiency(const Mechanism& mech, const ExAnteReport& rep) {
  const double ratio = rep.expected_optimal_welfare > 1e-12 ? rep.expected_welfare / rep.expected_optimal_welfare
                                                            : (std::abs(rep.expected_welfare) <= 1e-12 ? 1.0 : 0.0);
  AuditResult res{Property::efficiency, true, 0.0, 0.0, ""};
  if (mech.kind() == MechanismKind::lottery) {
    res.tolerance = 1e-6;
    res.worst_violation = std::max(0.0, 1.0 / mech.gamma() - ratio);
  } else {
    res.tolerance = 1e-9;
    res.worst_violation = std::abs(ratio - 1.0);
  }
  res.pass = res.worst_violation <= res.tolerance;
  if (!res.pass) res.witness = "welfare ratio " + std::to_string(ratio);
  return res;
}

/// All properties for one configured mechanism.
inline std::vector<AuditResult> audit_all(const Mechanism& mech, const MisreportUniverse& u, std::size_t threads = 0) {
  const ExAnteReport rep = ex_ante_report(mech);
  std::vector<AuditResult> out;
  out.push_back(audit_efficiency(mech, rep));
  out.push_back(audit_dsic(mech.scenario(), mech, u, threads));
  for (auto& r : audit_ex_ante(mech, rep)) out.push_back(std::move(r));
  out.push_back(audit_core_ex_ante(mech, rep));
  return out;
}

}  // namespace tscs
