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

#include <cstdint>
#include <vector>

#include "tscs/common.hpp"
#include "tscs/cost.hpp"
#include "tscs/market.hpp"

namespace tscs {

/// Deterministic stream of uniforms in [0,1) for scenario generation.
class GenStream {
 public:
  GenStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  double uniform() { return counter_uniform(seed_, stream_, next_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t next_ = 0;
};

/// Weighted coverage cost: buyer i covers a random subset of n+2 elements,
/// c(S) is the total weight of elements covered by S.
inline CostFunction random_coverage_cost(std::size_t n, GenStream& g) {
  const std::size_t elements = n + 2;
  std::vector<double> weight(elements);
  for (auto& w : weight) w = g.uniform(0.0, 1.2 / static_cast<double>(elements));
  std::vector<std::uint64_t> covers(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = 0; e < elements; ++e) {
      if (g.uniform() < 0.5) covers[i] |= std::uint64_t{1} << e;
    }
  }
  std::vector<double> table(std::size_t{1} << n, 0.0);
  for (Subset s = 1; s < table.size(); ++s) {
    std::uint64_t covered = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(s, i)) covered |= covers[i];
    }
    double c = 0.0;
    for (std::size_t e = 0; e < elements; ++e) {
      if ((covered >> e) & 1u) c += weight[e];
    }
    table[s] = c;
  }
  return CostFunction::tabular(n, std::move(table));
}

inline CostFunction random_general_cost(std::size_t n, GenStream& g) {
  std::vector<double> table(std::size_t{1} << n, 0.0);
  for (Subset s = 1; s < table.size(); ++s) table[s] = g.uniform(0.0, 0.4 * static_cast<double>(cardinality(s)));
  return CostFunction::tabular(n, std::move(table));
}

inline CostFunction random_additive_cost(std::size_t n, GenStream& g) {
  std::vector<double> per(n);
  for (auto& c : per) c = g.uniform(0.0, 0.6);
  return CostFunction::additive(std::move(per));
}

/// Random probabilities summing to one, each at least 0.05.
inline std::vector<double> random_probabilities(std::size_t k, GenStream& g) {
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& x : p) total += (x = 0.05 + g.uniform());
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < k; ++t) sum += (p[t] /= total);
  p[k - 1] = 1.0 - sum;
  return p;
}

/// Random scenario of the given class. Values are uniform in [0,1]; sellers
/// are uncapacitated. Submodular sellers get weighted coverage costs, NGS
/// and additive sellers additive costs, general sellers arbitrary tables.
/// The result depends only on the arguments.
inline MarketScenario gen_random_scenario(CostClass cls, std::size_t n, std::size_t m, std::size_t types_per_agent,
                                          std::uint64_t seed) {
  if (n < 1 || m < 1) throw DomainError("need at least one buyer and one seller");
  if (types_per_agent < 1) throw DomainError("need at least one type per agent");
  require_buyers(n);
  MarketScenario s;
  s.n = n;
  s.m = m;
  s.declared_class.assign(m, cls);
  for (std::size_t i = 0; i < n; ++i) {
    GenStream g(seed, i);
    const auto p = random_probabilities(types_per_agent, g);
    TypePrior<BuyerType> prior;
    for (std::size_t k = 0; k < types_per_agent; ++k) {
      BuyerType b;
      for (std::size_t j = 0; j < m; ++j) b.values.push_back(g.uniform());
      prior.push_back({p[k], std::move(b)});
    }
    s.buyer_priors.push_back(std::move(prior));
  }
  for (std::size_t j = 0; j < m; ++j) {
    GenStream g(seed, n + j);
    const auto p = random_probabilities(types_per_agent, g);
    TypePrior<SellerType> prior;
    for (std::size_t k = 0; k < types_per_agent; ++k) {
      SellerType t;
      t.capacity = n;
      switch (cls) {
        case CostClass::general: t.cost = random_general_cost(n, g); break;
        case CostClass::submodular: t.cost = random_coverage_cost(n, g); break;
        case CostClass::ngs:
        case CostClass::additive: t.cost = random_additive_cost(n, g); break;
      }
      prior.push_back({p[k], std::move(t)});
    }
    s.seller_priors.push_back(std::move(prior));
  }
  validate(s);
  return s;
}

}  // namespace tscs
