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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each criterion prints the first few failing cases beneath it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tscs.hpp"

using namespace tscs;

namespace {

std::string scenario_path(const std::string& name) { return std::string(TSCS_SCENARIO_DIR) + "/" + name; }

class Criterion {
 public:
  void fail(const std::string& why) {
    ++failures_;
    if (notes_.size() < 5) notes_.push_back(why);
  }
  void check(bool ok, const std::string& why) {
    ++checks_;
    if (!ok) fail(why);
  }
  bool ok() const { return failures_ == 0; }
  std::size_t checks() const { return checks_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> notes_;
};

bool report(int id, const std::string& title, const std::function<void(Criterion&)>& body) {
  Criterion c;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s criterion %d: %s (%zu checks, %.1f s)\n", c.ok() ? "PASS" : "FAIL", id, title.c_str(), c.checks(),
              secs);
  for (const auto& n : c.notes()) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  return c.ok();
}

std::string tag(const std::string& what, std::uint64_t seed) { return what + " seed " + std::to_string(seed); }

const AuditResult& find(const std::vector<AuditResult>& rs, Property p) {
  for (const auto& r : rs) {
    if (r.property == p) return r;
  }
  throw std::runtime_error("property missing");
}

// Efficient allocation; buyers pay their reported value, sellers get their
// reported cost.
struct FirstPrice {
  MechanismOutcome run(const Realization& r) const {
    const auto a = optimal_assignment_exhaustive(r).assignment;
    MechanismOutcome out;
    out.lottery = {{1.0, a}};
    out.prices.assign(r.n(), 0.0);
    out.wages.assign(r.m(), 0.0);
    for (std::size_t i = 0; i < r.n(); ++i) {
      if (a.sigma(i) != Assignment::kUnserved) out.prices[i] = r.value(i, a.sigma(i));
    }
    for (std::size_t j = 0; j < r.m(); ++j) out.wages[j] = r.cost(j, a.set(j));
    return out;
  }
};

Realization single_realization(CostClass cls, std::size_t n, std::size_t m, std::uint64_t seed) {
  return enumerate_realizations(gen_random_scenario(cls, n, m, 1, seed))[0];
}

// Capacity 2 makes fractional optima common among submodular draws.
MarketScenario capped(MarketScenario s, std::size_t capacity) {
  for (auto& p : s.seller_priors) {
    for (auto& a : p) a.type.capacity = capacity;
  }
  return s;
}

CostClass cycle_class(std::uint64_t seed) {
  static constexpr CostClass classes[] = {CostClass::general, CostClass::submodular, CostClass::additive};
  return classes[seed % 3];
}

void mechanism1_suite(Criterion& c) {
  struct Corpus {
    const char* name;
    CostClass cls;
    std::size_t n, m;
    bool alpha_one;
  };
  const Corpus corpora[] = {{"single-seller submodular", CostClass::submodular, 4, 1, true},
                            {"additive multi-seller", CostClass::additive, 3, 2, true},
                            {"general two-seller", CostClass::general, 3, 2, false}};
  for (const auto& corpus : corpora) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto s = gen_random_scenario(corpus.cls, corpus.n, corpus.m, 2, 1000 + seed);
      const auto mech = make_mechanism(s, {});
      const auto rep = ex_ante_report(mech);
      const std::string who = tag(corpus.name, 1000 + seed);
      const auto eff = audit_efficiency(mech, rep);
      c.check(eff.pass, who + ": efficiency " + eff.witness);
      const auto dsic = audit_dsic(s, mech, default_misreport_universe(s));
      c.check(dsic.pass, who + ": dsic " + dsic.witness);
      const auto ex = audit_ex_ante(mech, rep);
      c.check(find(ex, Property::ex_ante_bb).pass, who + ": budget balance " + find(ex, Property::ex_ante_bb).witness);
      c.check(find(ex, Property::ex_ante_ir).pass, who + ": ir " + find(ex, Property::ex_ante_ir).witness);
      const auto core = audit_core_ex_ante(mech, rep);
      c.check(core.pass, who + ": core " + core.witness);
      if (corpus.alpha_one) c.check(rep.alpha == 1.0, who + ": alpha " + std::to_string(rep.alpha));
    }
  }
}

void core_suite(Criterion& c) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const CostClass cls = cycle_class(seed);
    const auto r = single_realization(cls, 1 + seed % 5, 1 + seed % 2, 2000 + seed);
    const std::string who = tag(std::string(to_string(cls)), 2000 + seed);
    const std::vector<CostClass> classes(r.m(), cls);
    const auto dual = solve_dual(r, classes);
    const auto primal = solve_primal_lp(r);
    c.check(std::abs(dual.objective - primal.objective) <= 1e-6,
            who + ": duality gap " + std::to_string(dual.objective - primal.objective));
    const double w = optimal_assignment_exhaustive(r).welfare;
    const auto core = core_utilities(r, w, classes);
    const auto check = verify_core(core.y, core.z, r, core.alpha);
    c.check(check.in_core, who + ": core utilities rejected");
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const CostClass cls = cycle_class(seed);
    const auto r = single_realization(cls, 2 + seed % 3, 2 + seed % 2, 3000 + seed);
    const std::string who = tag(std::string(to_string(cls)), 3000 + seed);
    const std::vector<CostClass> classes(r.m(), cls);
    const double w = optimal_assignment_exhaustive(r).welfare;
    const auto core = core_utilities(r, w, classes);
    // Also probe shrunken utilities, which sit outside the core.
    for (double shrink : {1.0, 0.9, 0.5}) {
      std::vector<double> y = core.y, z = core.z;
      for (double& v : y) v *= shrink;
      for (double& v : z) v *= shrink;
      const auto single = verify_core(y, z, r, core.alpha);
      const auto mixed = verify_core_all_coalitions(y, z, r, core.alpha);
      c.check(single.in_core == mixed.in_core, who + ": reduction disagrees at shrink " + std::to_string(shrink));
    }
  }
}

void sampled_suite(Criterion& c) {
  {
    const auto t = load_scenario(scenario_path("T.json"));
    const auto a = load_scenario(scenario_path("A.json"));
    for (const auto* s : {&t, &a}) {
      const auto exact = precompute_exact(*s);
      const auto sampled = precompute_sampled(*s, 0.3, 5);
      const double shift = 0.3 / std::pow(static_cast<double>(s->n + s->m), 2);
      for (std::size_t i = 0; i < s->n; ++i) c.check(sampled.y_bar[i] == exact.y_bar[i] + shift, "identity buyer");
      for (std::size_t j = 0; j < s->m; ++j) c.check(sampled.z_bar[j] == exact.z_bar[j] + shift, "identity seller");
    }
  }
  const auto b = load_scenario(scenario_path("B.json"));
  const double eps = 0.3;
  const auto exact = precompute_exact(b);
  const double width = 2.0 * eps / std::pow(static_cast<double>(b.n + b.m), 2);
  c.check(conformant_sample_count(b.n, b.m, eps) == 36000, "conformant sample count");
  std::size_t inside = 0;
  const std::size_t runs = 200;
  for (std::uint64_t seed = 0; seed < runs; ++seed) {
    const auto sampled = precompute_sampled(b, eps, seed);
    bool in_band = true;
    for (std::size_t i = 0; i < b.n; ++i) {
      in_band = in_band && sampled.y_bar[i] >= exact.y_bar[i] && sampled.y_bar[i] <= exact.y_bar[i] + width;
    }
    for (std::size_t j = 0; j < b.m; ++j) {
      in_band = in_band && sampled.z_bar[j] >= exact.z_bar[j] && sampled.z_bar[j] <= exact.z_bar[j] + width;
    }
    if (!in_band) continue;
    ++inside;
    const Mechanism mech(b, MechanismKind::sampled, sampled);
    const auto rep = ex_ante_report(mech);
    c.check(rep.expected_surplus >= -1e-9, tag("band run surplus " + std::to_string(rep.expected_surplus), seed));
    for (double u : rep.expected_utility) c.check(u >= -eps, tag("band run utility " + std::to_string(u), seed));
  }
  const double freq = static_cast<double>(inside) / static_cast<double>(runs);
  c.check(freq >= 1.0 - eps, "band frequency " + std::to_string(freq));
  std::printf("    band frequency %.3f over %zu seeds\n", freq, runs);
}

void lottery_suite(Criterion& c) {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = single_realization(CostClass::submodular, n, 1, 4000 + 10 * n + seed);
      c.check(vhat(0, 0, r) == 0.0, "vhat of the empty set");
      for (Subset s = 0; s <= full_set(n); ++s) {
        const double v = vhat(0, s, r);
        for (std::size_t i = 0; i < n; ++i) {
          if (!contains(s, i) && v > vhat(0, s | singleton(i), r) + 1e-12) {
            c.fail(tag("vhat not monotone n=" + std::to_string(n), seed));
          }
        }
        if (s == full_set(n)) break;
      }
      c.check(true, "");
    }
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r = single_realization(CostClass::submodular, 1 + seed % 4, 1 + seed % 2, 5000 + seed);
    const double gap = solve_primal_lp_vhat(r).objective - solve_primal_lp(r).objective;
    c.check(std::abs(gap) <= 1e-9, tag("vhat changes the optimum by " + std::to_string(gap), 5000 + seed));
  }
  std::size_t fractional_lps = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r =
        enumerate_realizations(capped(gen_random_scenario(CostClass::submodular, 3 + seed % 2, 2 + seed % 2, 1, 6000 + seed), 2))[0];
    const auto x = solve_primal_lp(r);
    const auto l = decompose(x, r);
    if (l.gamma > 1.0 + 1e-9) ++fractional_lps;
    double total = 0.0;
    for (const auto& a : l.atoms) total += a.weight;
    c.check(std::abs(total - 1.0) <= 1e-9, tag("weights sum to " + std::to_string(total), 6000 + seed));
    for (const auto& col : x.columns) {
      const double gap = l.marginal(col.seller, col.set) - col.weight / l.gamma;
      c.check(std::abs(gap) <= 1e-6, tag("marginal off by " + std::to_string(gap), 6000 + seed));
    }
  }
  std::printf("    %zu of 200 decompositions need a scale above 1\n", fractional_lps);
  MechanismParams p;
  p.kind = MechanismKind::lottery;
  std::vector<MarketScenario> corpus{load_scenario(scenario_path("A.json")), load_scenario(scenario_path("B.json"))};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    corpus.push_back(gen_random_scenario(CostClass::submodular, 3, 2, 1 + seed % 2, 7000 + seed));
    corpus.push_back(capped(gen_random_scenario(CostClass::submodular, 3, 2 + seed % 2, 1 + seed % 2, 7500 + seed), 2));
  }
  std::size_t fractional = 0;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto mech = make_mechanism(corpus[k], p);
    if (mech.gamma() > 1.0 + 1e-9) ++fractional;
    const auto rep = ex_ante_report(mech);
    const auto eff = audit_efficiency(mech, rep);
    c.check(eff.pass, "lottery corpus " + std::to_string(k) + ": efficiency " + eff.witness);
    const auto core = audit_core_ex_ante(mech, rep);
    c.check(core.pass, "lottery corpus " + std::to_string(k) + ": core " + core.witness);
  }
  std::printf("    %zu of %zu lottery scenarios need a scale above 1\n", fractional, corpus.size());
}

void negative_controls(Criterion& c) {
  const auto b = load_scenario(scenario_path("B.json"));
  const auto dsic = audit_dsic(b, FirstPrice{}, default_misreport_universe(b));
  c.check(!dsic.pass && !dsic.witness.empty(), "first-price mechanism passed the truthfulness audit");
  std::printf("    first-price witness: %s\n", dsic.witness.c_str());

  const auto s = load_scenario(scenario_path("C.json"));
  const auto rep = ex_ante_report(make_mechanism(s, {}));
  const std::vector<double> zero(s.n + s.m, 0.0);
  const auto core = audit_core_ex_ante(rep.coalition_welfare, zero, s.n, s.m, 1.0);
  c.check(!core.pass && core.witness.find("grand coalition") != std::string::npos,
          "zeroed utilities did not fail at the grand coalition");
  std::printf("    zeroed-utility witness: %s\n", core.witness.c_str());

  MarketScenario ngs;
  ngs.n = 3;
  ngs.m = 2;
  ngs.buyer_priors = {{{1.0, {{0.4, 0.8}}}}, {{1.0, {{0.7, 0.4}}}}, {{1.0, {{0.4, 0.1}}}}};
  ngs.seller_priors = {{{1.0, {CostFunction::tabular(3, {0, 0.1, 0.4, 0.9, 0.8, 0.1, 0.9, 0.6}), 3}}},
                       {{1.0, {CostFunction::tabular(3, {0, 0.4, 0.2, 0.3, 0.6, 0.7, 0.9, 0.9}), 3}}}};
  ngs.declared_class = {CostClass::ngs, CostClass::ngs};
  const auto r = enumerate_realizations(ngs)[0];
  bool integrality_failure = false;
  try {
    optimal_assignment_ngs(r);
  } catch (const IntegralityFailure&) {
    integrality_failure = true;
  }
  bool grid_counterexample = false;
  for (const auto& t : r.sellers) {
    grid_counterexample = grid_counterexample || !check_ngs_local(t.cost, default_ngs_grid(t.cost)).holds;
  }
  c.check(integrality_failure || grid_counterexample, "non-submodular table declared substitutes went undetected");
  std::printf("    declared-substitutes control: integrality failure %s, grid counterexample %s\n",
              integrality_failure ? "yes" : "no", grid_counterexample ? "yes" : "no");
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "exact-prior mechanism audits on 150 seeded scenarios", mechanism1_suite);
  ok &= report(2, "core computation: duality, core membership, coalition reduction", core_suite);
  ok &= report(3, "sampled mechanism: identity, band frequency, conditional guarantees", sampled_suite);
  ok &= report(4, "lottery mechanism: pruned values, decomposition, efficiency and core", lottery_suite);
  ok &= report(5, "negative controls", negative_controls);
  std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
