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

// JSON scenario files.
//
//   {"n": 2, "m": 1,
//    "buyers":  [[{"p": 1, "values": [0.5]}], [{"p": 1, "values": [0.4]}]],
//    "sellers": [[{"p": 1, "capacity": 2,
//                  "cost": {"kind": "tabular", "table": {"0": 0, "1": 0.2, "2": 0.2, "3": 0.3}}}]],
//    "declared_class": ["submodular"]}
//
// Table keys are decimal bitmasks (bit i set = buyer i+1 served). Every one of
// the 2^n subsets must be listed.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscs/common.hpp"
#include "tscs/cost.hpp"
#include "tscs/market.hpp"

namespace tscs {

namespace io_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw InputError(path + ": " + what);
}

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

inline CostFunction parse_cost(const json& c, std::size_t n, const std::string& path) {
  const json& kind = field(c, "kind", path);
  if (!kind.is_string()) fail(path + ".kind", "expected a string");
  const auto k = kind.get<std::string>();
  try {
    if (k == "additive") {
      const json& per = array(field(c, "per_buyer", path), path + ".per_buyer");
      if (per.size() != n) fail(path + ".per_buyer", "expected " + std::to_string(n) + " entries");
      std::vector<double> v;
      for (std::size_t i = 0; i < per.size(); ++i) v.push_back(number(per[i], path + ".per_buyer[" + std::to_string(i) + "]"));
      return CostFunction::additive(std::move(v));
    }
    if (k == "tabular") {
      const json& t = field(c, "table", path);
      if (!t.is_object()) fail(path + ".table", "expected an object keyed by subset bitmask");
      const std::size_t size = std::size_t{1} << n;
      std::vector<double> table(size, 0.0);
      std::vector<char> seen(size, 0);
      for (const auto& [key, value] : t.items()) {
        std::size_t pos = 0;
        unsigned long long s = 0;
        try {
          s = std::stoull(key, &pos, 10);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos == 0 || pos != key.size() || s >= size) {
          fail(path + ".table[\"" + key + "\"]", "key must be a decimal bitmask below " + std::to_string(size));
        }
        if (seen[s]) fail(path + ".table[\"" + key + "\"]", "duplicate subset");
        seen[s] = 1;
        table[s] = number(value, path + ".table[\"" + key + "\"]");
      }
      for (std::size_t s = 0; s < size; ++s) {
        if (!seen[s]) fail(path + ".table", "missing entry for subset " + std::to_string(s) + "; all 2^n subsets are required");
      }
      return CostFunction::tabular(n, std::move(table));
    }
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
  fail(path + ".kind", "unknown cost kind '" + k + "' (expected additive or tabular)");
}

inline std::string line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace io_detail

/// Parses and validates a scenario document. Errors are InputError with a
/// field path such as "sellers[0][1].cost.table".
inline MarketScenario scenario_from_json(const nlohmann::json& doc) {
  using namespace io_detail;
  MarketScenario s;
  s.n = count(field(doc, "n", "$"), "$.n");
  s.m = count(field(doc, "m", "$"), "$.m");
  if (s.n == 0 || s.m == 0) fail("$", "n and m must be at least 1");
  if (s.n > kMaxBuyers) fail("$.n", "at most " + std::to_string(kMaxBuyers) + " buyers are supported");

  const json& buyers = array(field(doc, "buyers", "$"), "$.buyers");
  if (buyers.size() != s.n) fail("$.buyers", "expected " + std::to_string(s.n) + " priors");
  for (std::size_t i = 0; i < s.n; ++i) {
    const std::string p = "$.buyers[" + std::to_string(i) + "]";
    TypePrior<BuyerType> prior;
    for (std::size_t k = 0; k < array(buyers[i], p).size(); ++k) {
      const std::string q = p + "[" + std::to_string(k) + "]";
      const json& atom = buyers[i][k];
      BuyerType b;
      const json& vals = array(field(atom, "values", q), q + ".values");
      if (vals.size() != s.m) fail(q + ".values", "expected " + std::to_string(s.m) + " values");
      for (std::size_t j = 0; j < vals.size(); ++j) b.values.push_back(number(vals[j], q + ".values[" + std::to_string(j) + "]"));
      prior.push_back({number(field(atom, "p", q), q + ".p"), std::move(b)});
    }
    s.buyer_priors.push_back(std::move(prior));
  }

  const json& sellers = array(field(doc, "sellers", "$"), "$.sellers");
  if (sellers.size() != s.m) fail("$.sellers", "expected " + std::to_string(s.m) + " priors");
  for (std::size_t j = 0; j < s.m; ++j) {
    const std::string p = "$.sellers[" + std::to_string(j) + "]";
    TypePrior<SellerType> prior;
    for (std::size_t k = 0; k < array(sellers[j], p).size(); ++k) {
      const std::string q = p + "[" + std::to_string(k) + "]";
      const json& atom = sellers[j][k];
      SellerType t;
      t.cost = parse_cost(field(atom, "cost", q), s.n, q + ".cost");
      t.capacity = atom.contains("capacity") ? count(atom["capacity"], q + ".capacity") : s.n;
      prior.push_back({number(field(atom, "p", q), q + ".p"), std::move(t)});
    }
    s.seller_priors.push_back(std::move(prior));
  }

  if (doc.contains("declared_class")) {
    const json& dc = array(doc["declared_class"], "$.declared_class");
    if (dc.size() != s.m) fail("$.declared_class", "expected " + std::to_string(s.m) + " entries");
    for (std::size_t j = 0; j < s.m; ++j) {
      const std::string p = "$.declared_class[" + std::to_string(j) + "]";
      if (!dc[j].is_string()) fail(p, "expected a string");
      const auto c = parse_cost_class(dc[j].get<std::string>());
      if (!c) fail(p, "unknown class '" + dc[j].get<std::string>() + "'");
      s.declared_class.push_back(*c);
    }
  } else {
    s.declared_class.assign(s.m, CostClass::general);
  }

  try {
    validate(s);
  } catch (const Error& e) {
    fail("$", e.what());
  }
  return s;
}

inline MarketScenario parse_scenario(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("malformed JSON at " + io_detail::line_of(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  return scenario_from_json(doc);
}

inline MarketScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

/// Doubles are written in shortest round-trip form, so a write/read cycle is
/// bit-exact.
inline nlohmann::json scenario_to_json(const MarketScenario& s) {
  using nlohmann::json;
  json doc;
  doc["n"] = s.n;
  doc["m"] = s.m;
  json buyers = json::array();
  for (const auto& prior : s.buyer_priors) {
    json atoms = json::array();
    for (const auto& a : prior) atoms.push_back({{"p", a.probability}, {"values", a.type.values}});
    buyers.push_back(std::move(atoms));
  }
  doc["buyers"] = std::move(buyers);
  json sellers = json::array();
  for (const auto& prior : s.seller_priors) {
    json atoms = json::array();
    for (const auto& a : prior) {
      json cost;
      const auto data = a.type.cost.data();
      if (a.type.cost.is_additive()) {
        cost = {{"kind", "additive"}, {"per_buyer", std::vector<double>(data.begin(), data.end())}};
      } else {
        json table = json::object();
        for (std::size_t k = 0; k < data.size(); ++k) table[std::to_string(k)] = data[k];
        cost = {{"kind", "tabular"}, {"table", std::move(table)}};
      }
      atoms.push_back({{"p", a.probability}, {"capacity", a.type.capacity}, {"cost", std::move(cost)}});
    }
    sellers.push_back(std::move(atoms));
  }
  doc["sellers"] = std::move(sellers);
  json dc = json::array();
  for (auto c : s.declared_class) dc.push_back(std::string(to_string(c)));
  doc["declared_class"] = std::move(dc);
  return doc;
}

inline void save_scenario(const MarketScenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot write scenario file");
  out << scenario_to_json(s).dump(2) << "\n";
}

}  // namespace tscs
