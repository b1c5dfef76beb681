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

// tscs: run, audit and inspect two-sided cost-sharing mechanisms.
//
// Exit codes: 0 success, 1 audit failure, 2 input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tscs.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kAuditFailed = 1;
constexpr int kInputError = 2;

struct Options {
  std::string scenario;
  int mechanism = 1;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> gamma;
  std::string report;
  std::size_t threads = 0;
  std::size_t max_realizations = tscs::Caps{}.realizations;
  bool all = false;
  std::vector<std::string> properties;
  std::size_t realization = 0;
  std::string cost_class = "submodular";
  std::size_t n = 3;
  std::size_t m = 1;
  std::size_t types = 2;
  std::string out;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Output sink: a file when a path is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw tscs::InputError(path + ": cannot open for writing");
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void header(std::ostream& os, const std::string& command, const Options& o, bool mechanism_fields) {
  os << "# tscs " << tscs::kVersion << " " << command << "\n";
  if (!o.scenario.empty()) os << "# scenario=" << o.scenario << "\n";
  if (mechanism_fields) {
    os << "# mechanism=" << o.mechanism << " epsilon=" << (o.epsilon ? num(*o.epsilon) : "none")
       << " seed=" << (o.seed ? std::to_string(*o.seed) : "none")
       << " samples=" << (o.samples ? std::to_string(*o.samples) : "conformant")
       << " gamma=" << (o.gamma ? num(*o.gamma) : "auto") << "\n";
  }
  os << "# threads=" << tscs::resolve_threads(o.threads) << " max_realizations=" << o.max_realizations << "\n";
}

void check_mechanism_flags(const Options& o) {
  if (o.mechanism < 1 || o.mechanism > 3) throw tscs::InputError("--mechanism must be 1, 2 or 3");
  if (o.mechanism == 2 && !(o.epsilon && *o.epsilon > 0.0)) {
    throw tscs::InputError("--mechanism 2 needs --epsilon > 0");
  }
  if (o.mechanism >= 2 && !o.seed) throw tscs::InputError("--mechanism " + std::to_string(o.mechanism) + " needs --seed");
  if (o.epsilon && !(*o.epsilon > 0.0)) throw tscs::InputError("--epsilon must be positive");
  if (o.samples && *o.samples == 0) throw tscs::InputError("--samples must be positive");
}

tscs::Mechanism build(const tscs::MarketScenario& s, const Options& o, const tscs::MisreportUniverse* calibrate) {
  tscs::MechanismParams p;
  p.kind = static_cast<tscs::MechanismKind>(o.mechanism);
  p.epsilon = o.epsilon.value_or(0.0);
  p.seed = o.seed.value_or(0);
  p.samples = o.samples;
  p.gamma = o.gamma;
  p.threads = o.threads;
  p.caps.realizations = o.max_realizations;
  if (p.kind == tscs::MechanismKind::lottery && !p.gamma && calibrate) {
    // One scale must serve every report the audit will feed the mechanism.
    p.gamma = tscs::lottery_gamma(tscs::dsic_reports(s, *calibrate, p.caps));
  }
  return tscs::make_mechanism(s, p);
}

void config_lines(std::ostream& os, const tscs::Mechanism& mech) {
  const auto& e = mech.expected();
  os << "# preprocessing=" << (e.mode == tscs::ExpectedCoreUtilities::Mode::exact ? "exact" : "sampled");
  if (e.mode == tscs::ExpectedCoreUtilities::Mode::sampled) {
    os << " samples=" << e.samples << " conformant=" << (e.conformant ? "yes" : "no") << " shift=" << num(e.shift);
  }
  os << " gamma=" << num(mech.gamma()) << "\n";
}

int cmd_run(const Options& o) {
  check_mechanism_flags(o);
  const auto s = tscs::load_scenario(o.scenario);
  const auto mech = build(s, o, nullptr);
  tscs::Caps caps;
  caps.realizations = o.max_realizations;
  const auto rep = tscs::ex_ante_report(mech, caps);
  Sink sink(o.report);
  auto& os = sink.out();
  header(os, "run", o, true);
  config_lines(os, mech);
  os << "agent_id,kind,expected_utility,price_or_wage_expectation\n";
  for (std::size_t i = 0; i < s.n; ++i) {
    os << i + 1 << ",buyer," << num(rep.expected_utility[i]) << "," << num(rep.expected_price[i]) << "\n";
  }
  for (std::size_t j = 0; j < s.m; ++j) {
    os << j + 1 << ",seller," << num(rep.expected_utility[s.n + j]) << "," << num(rep.expected_wage[j]) << "\n";
  }
  os << "# summary\n";
  os << "expected_welfare,expected_optimal_welfare,budget_surplus,min_core_slack,alpha,delta,gamma\n";
  os << num(rep.expected_welfare) << "," << num(rep.expected_optimal_welfare) << "," << num(rep.expected_surplus) << ","
     << num(rep.min_core_slack) << "," << num(rep.alpha) << "," << num(rep.delta) << "," << num(rep.gamma) << "\n";
  return kOk;
}

int cmd_audit(const Options& o) {
  check_mechanism_flags(o);
  std::vector<tscs::Property> wanted;
  if (o.all || o.properties.empty()) {
    wanted = {tscs::Property::efficiency, tscs::Property::dsic, tscs::Property::ex_ante_ir, tscs::Property::ex_ante_bb,
              tscs::Property::ex_ante_wbb, tscs::Property::core};
  } else {
    for (const auto& name : o.properties) {
      bool found = false;
      for (auto p : {tscs::Property::efficiency, tscs::Property::dsic, tscs::Property::ex_ante_ir,
                     tscs::Property::ex_ante_bb, tscs::Property::ex_ante_wbb, tscs::Property::core}) {
        if (tscs::to_string(p) == name) {
          wanted.push_back(p);
          found = true;
        }
      }
      if (!found) throw tscs::InputError("unknown property '" + name + "'");
    }
  }
  const auto s = tscs::load_scenario(o.scenario);
  const auto universe = tscs::default_misreport_universe(s);
  const auto mech = build(s, o, &universe);
  tscs::Caps caps;
  caps.realizations = o.max_realizations;

  std::vector<tscs::AuditResult> results;
  const auto rep = tscs::ex_ante_report(mech, caps);
  results.push_back(tscs::audit_efficiency(mech, rep));
  results.push_back(tscs::audit_dsic(s, mech, universe, o.threads, caps));
  for (auto& r : tscs::audit_ex_ante(mech, rep)) results.push_back(std::move(r));
  results.push_back(tscs::audit_core_ex_ante(mech, rep));

  Sink sink(o.report);
  auto& os = sink.out();
  header(os, "audit", o, true);
  config_lines(os, mech);
  os << "# misreports buyers=" << universe.buyers.size() << " sellers=" << universe.sellers.size()
     << " core_multiplier=" << num(rep.core_multiplier()) << "\n";
  os << "property,pass,worst_violation,tolerance,witness\n";
  bool ok = true;
  for (auto p : wanted) {
    for (const auto& r : results) {
      if (r.property != p) continue;
      os << tscs::to_string(r.property) << "," << (r.pass ? "pass" : "fail") << "," << num(r.worst_violation) << ","
         << num(r.tolerance) << "," << csv_field(r.witness) << "\n";
      ok = ok && r.pass;
    }
  }
  return ok ? kOk : kAuditFailed;
}

int cmd_core(const Options& o) {
  const auto s = tscs::load_scenario(o.scenario);
  const auto realizations = tscs::enumerate_realizations(s, o.max_realizations);
  Sink sink(o.report);
  auto& os = sink.out();
  header(os, "core", o, false);
  os << "realization,probability";
  for (std::size_t i = 0; i < s.n; ++i) os << ",y" << i + 1;
  for (std::size_t j = 0; j < s.m; ++j) os << ",z" << j + 1;
  os << ",alpha,W,W_star\n";
  for (std::size_t k = 0; k < realizations.size(); ++k) {
    const auto& r = realizations[k];
    const double w = tscs::optimal_assignment_exhaustive(r).welfare;
    const auto c = tscs::core_utilities(r, w, s.declared_class);
    os << k << "," << num(r.probability);
    for (double v : c.y) os << "," << num(v);
    for (double v : c.z) os << "," << num(v);
    os << "," << num(c.alpha) << "," << num(c.welfare) << "," << num(c.welfare_star) << "\n";
  }
  return kOk;
}

int cmd_lottery(const Options& o) {
  const auto s = tscs::load_scenario(o.scenario);
  const auto realizations = tscs::enumerate_realizations(s, o.max_realizations);
  if (o.realization >= realizations.size()) {
    throw tscs::InputError("--realization must be below " + std::to_string(realizations.size()));
  }
  const auto& r = realizations[o.realization];
  const auto x = tscs::solve_primal_lp(r);
  const auto lottery = tscs::prune_lottery(tscs::decompose(x, r, o.gamma), r);
  Sink sink(o.report);
  auto& os = sink.out();
  header(os, "lottery", o, false);
  os << "# realization=" << o.realization << " probability=" << num(r.probability) << " W_star=" << num(x.objective)
     << " gamma=" << num(lottery.gamma) << " gamma_min=" << num(lottery.gamma_min) << "\n";
  os << "weight,assignment\n";
  for (const auto& a : lottery.atoms) os << num(a.weight) << "," << a.assignment.word() << "\n";
  return kOk;
}

int cmd_gen(const Options& o) {
  const auto cls = tscs::parse_cost_class(o.cost_class);
  if (!cls) throw tscs::InputError("--class must be general, submodular, ngs or additive");
  if (!o.seed) throw tscs::InputError("gen needs --seed");
  auto s = tscs::gen_random_scenario(*cls, o.n, o.m, o.types, *o.seed);
  auto doc = tscs::scenario_to_json(s);
  doc["generator"] = {{"version", tscs::kVersion}, {"class", o.cost_class}, {"n", o.n}, {"m", o.m},
                      {"types_per_agent", o.types}, {"seed", *o.seed}};
  Sink sink(o.out);
  sink.out() << doc.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Two-sided cost-sharing mechanisms: run, audit and inspect"};
  app.set_version_flag("--version", std::string(tscs::kVersion));
  app.require_subcommand(1);

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "worker threads (0: TSCS_THREADS or 1)");
    sub->add_option("--max-realizations", o.max_realizations, "cap on the enumerated prior support");
  };
  auto add_mechanism = [&o](CLI::App* sub) {
    sub->add_option("--mechanism", o.mechanism, "1 exact, 2 sampled, 3 lottery")->required();
    sub->add_option("--epsilon", o.epsilon, "sampling accuracy (mechanism 2; optional for 3)");
    sub->add_option("--seed", o.seed, "sampling seed (mechanisms 2 and 3)");
    sub->add_option("--samples", o.samples, "override the conformant sample count");
    sub->add_option("--gamma", o.gamma, "lottery scale (mechanism 3)");
  };

  auto* run = app.add_subcommand("run", "expected utilities, prices and wages of a mechanism");
  run->add_option("--scenario", o.scenario, "scenario JSON file")->required();
  add_mechanism(run);
  run->add_option("--report", o.report, "write the CSV report here instead of stdout");
  add_common(run);

  auto* audit = app.add_subcommand("audit", "verify efficiency, DSIC, ex-ante IR/BB and the ex-ante core");
  audit->add_option("--scenario", o.scenario, "scenario JSON file")->required();
  add_mechanism(audit);
  audit->add_flag("--all", o.all, "audit every property");
  audit->add_option("--property", o.properties, "audit only these properties");
  audit->add_option("--report", o.report, "write the CSV here instead of stdout");
  add_common(audit);

  auto* core = app.add_subcommand("core", "core utilities per realization");
  core->add_option("--scenario", o.scenario, "scenario JSON file")->required();
  core->add_option("--report", o.report, "write the CSV here instead of stdout");
  add_common(core);

  auto* lottery = app.add_subcommand("lottery", "lottery decomposition of one realization");
  lottery->add_option("--scenario", o.scenario, "scenario JSON file")->required();
  lottery->add_option("--realization", o.realization, "index in enumeration order")->required();
  lottery->add_option("--gamma", o.gamma, "scale (default: the minimal one)");
  lottery->add_option("--report", o.report, "write the CSV here instead of stdout");
  add_common(lottery);

  auto* gen = app.add_subcommand("gen", "random scenario");
  gen->add_option("--class", o.cost_class, "general, submodular, ngs or additive")->required();
  gen->add_option("--n", o.n, "buyers")->required();
  gen->add_option("--m", o.m, "sellers")->required();
  gen->add_option("--types-per-agent", o.types, "prior support size per agent");
  gen->add_option("--seed", o.seed, "generator seed")->required();
  gen->add_option("--out", o.out, "write the scenario here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*run) return cmd_run(o);
    if (*audit) return cmd_audit(o);
    if (*core) return cmd_core(o);
    if (*lottery) return cmd_lottery(o);
    if (*gen) return cmd_gen(o);
  } catch (const tscs::Error& e) {
    std::cerr << "tscs: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "tscs: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
