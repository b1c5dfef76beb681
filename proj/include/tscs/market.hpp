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
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tscs/common.hpp"
#include "tscs/cost.hpp"

namespace tscs {

/// Values v_ij in [0,1], one per seller.
struct BuyerType {
  std::vector<double> values;

  friend bool operator==(const BuyerType&, const BuyerType&) = default;
};

struct SellerType {
  CostFunction cost;
  std::size_t capacity = 0;  ///< at most this many buyers; 1..n

  friend bool operator==(const SellerType&, const SellerType&) = default;
};

template <typename T>
struct PriorAtom {
  double probability = 1.0;
  T type;
};

/// Finite discrete prior over one agent's types.
template <typename T>
using TypePrior = std::vector<PriorAtom<T>>;

/// Cost class a seller is declared to belong to. Only submodularity can be
/// checked exactly; NGS membership is taken on declaration.
enum class CostClass { general, submodular, ngs, additive };

inline std::string_view to_string(CostClass c) {
  switch (c) {
    case CostClass::general: return "general";
    case CostClass::submodular: return "submodular";
    case CostClass::ngs: return "ngs";
    case CostClass::additive: return "additive";
  }
  return "general";
}

inline std::optional<CostClass> parse_cost_class(std::string_view s) {
  if (s == "general") return CostClass::general;
  if (s == "submodular") return CostClass::submodular;
  if (s == "ngs") return CostClass::ngs;
  if (s == "additive") return CostClass::additive;
  return std::nullopt;
}

/// Classes whose demand problems are at least submodular.
inline bool is_submodular_class(CostClass c) { return c != CostClass::general; }
inline bool is_ngs_class(CostClass c) { return c == CostClass::ngs || c == CostClass::additive; }

/// Common-knowledge market description: independent priors over every
/// buyer's values and every seller's cost function.
struct MarketScenario {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<TypePrior<BuyerType>> buyer_priors;
  std::vector<TypePrior<SellerType>> seller_priors;
  std::vector<CostClass> declared_class;

  std::size_t num_agents() const { return n + m; }

  std::size_t support_size(std::size_t agent) const {
    return agent < n ? buyer_priors[agent].size() : seller_priors[agent - n].size();
  }

  double probability(std::size_t agent, std::size_t index) const {
    return agent < n ? buyer_priors[agent][index].probability : seller_priors[agent - n][index].probability;
  }
};

inline void validate_buyer_type(const BuyerType& b, std::size_t m, const std::string& where) {
  if (b.values.size() != m) throw DomainError(where + ": expected " + std::to_string(m) + " values");
  for (double v : b.values) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw DomainError(where + ": values must lie in [0,1]");
  }
}

inline void validate_seller_type(const SellerType& s, std::size_t n, const std::string& where) {
  if (s.cost.ground_size() != n) throw DomainError(where + ": cost must be defined over " + std::to_string(n) + " buyers");
  if (s.capacity < 1 || s.capacity > n) throw DomainError(where + ": capacity must lie in 1..n");
}

template <typename T>
void validate_prior(const TypePrior<T>& prior, const std::string& where) {
  if (prior.empty()) throw DomainError(where + ": prior support must be nonempty");
  double total = 0.0;
  for (const auto& atom : prior) {
    if (!(atom.probability > 0.0 && atom.probability <= 1.0)) {
      throw DomainError(where + ": probabilities must lie in (0,1]");
    }
    total += atom.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError(where + ": probabilities must sum to 1");
}

inline void validate(const MarketScenario& s) {
  if (s.n < 1 || s.m < 1) throw DomainError("scenario needs at least one buyer and one seller");
  require_buyers(s.n);
  if (s.buyer_priors.size() != s.n) throw DomainError("scenario needs one prior per buyer");
  if (s.seller_priors.size() != s.m) throw DomainError("scenario needs one prior per seller");
  if (s.declared_class.size() != s.m) throw DomainError("scenario needs one declared class per seller");
  for (std::size_t i = 0; i < s.n; ++i) {
    const std::string where = "buyer " + std::to_string(i);
    validate_prior(s.buyer_priors[i], where);
    for (const auto& atom : s.buyer_priors[i]) validate_buyer_type(atom.type, s.m, where);
  }
  for (std::size_t j = 0; j < s.m; ++j) {
    const std::string where = "seller " + std::to_string(j);
    validate_prior(s.seller_priors[j], where);
    for (const auto& atom : s.seller_priors[j]) validate_seller_type(atom.type, s.n, where);
  }
}

/// One draw of every agent's type. `support_index` records which prior atom
/// each agent (buyers first, then sellers) drew; it is empty for reports
/// built outside the prior.
struct Realization {
  std::vector<BuyerType> buyers;
  std::vector<SellerType> sellers;
  double probability = 1.0;
  std::vector<std::size_t> support_index;

  std::size_t n() const { return buyers.size(); }
  std::size_t m() const { return sellers.size(); }
  double value(std::size_t i, std::size_t j) const { return buyers[i].values[j]; }
  double cost(std::size_t j, Subset s) const { return sellers[j].cost(s); }
  std::size_t capacity(std::size_t j) const { return sellers[j].capacity; }

  /// Seller-local welfare V_j(S) = sum_{i in S} v_ij - c_j(S).
  double local_welfare(std::size_t j, Subset s) const {
    double total = -sellers[j].cost(s);
    for (std::size_t i = 0; i < buyers.size(); ++i) {
      if (contains(s, i)) total += buyers[i].values[j];
    }
    return total;
  }
};

/// Builds the realization selecting `index[a]` from each agent's prior.
inline Realization make_realization(const MarketScenario& s, const std::vector<std::size_t>& index) {
  Realization r;
  r.buyers.reserve(s.n);
  r.sellers.reserve(s.m);
  r.probability = 1.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto& atom = s.buyer_priors[i].at(index[i]);
    r.buyers.push_back(atom.type);
    r.probability *= atom.probability;
  }
  for (std::size_t j = 0; j < s.m; ++j) {
    const auto& atom = s.seller_priors[j].at(index[s.n + j]);
    r.sellers.push_back(atom.type);
    r.probability *= atom.probability;
  }
  r.support_index = index;
  return r;
}

inline std::size_t realization_count(const MarketScenario& s, std::size_t cap) {
  long double total = 1;
  for (std::size_t a = 0; a < s.num_agents(); ++a) total *= static_cast<long double>(s.support_size(a));
  if (total > static_cast<long double>(cap)) {
    std::ostringstream msg;
    msg << "enumeration too large: " << std::setprecision(20) << total << " realizations exceed the cap of " << cap;
    throw SizeError(msg.str());
  }
  return static_cast<std::size_t>(total);
}

/// Complete product enumeration. Agent 0 (buyer 1) is the most significant
/// digit; within an agent, support order.
inline std::vector<Realization> enumerate_realizations(const MarketScenario& s, std::size_t cap = Caps{}.realizations) {
  validate(s);
  const std::size_t total = realization_count(s, cap);
  std::vector<Realization> out;
  out.reserve(total);
  std::vector<std::size_t> index(s.num_agents(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    out.push_back(make_realization(s, index));
    for (std::size_t a = s.num_agents(); a-- > 0;) {
      if (++index[a] < s.support_size(a)) break;
      index[a] = 0;
    }
  }
  return out;
}

/// Buyers served by each seller. Buyers outside every set are unserved.
class Assignment {
 public:
  static constexpr int kUnserved = -1;

  Assignment() = default;

  static Assignment from_sets(std::vector<Subset> sets, std::size_t n) {
    Subset seen = 0;
    for (Subset s : sets) {
      if ((s & seen) != 0) throw AssignmentError("seller sets must be pairwise disjoint");
      if ((s & ~full_set(n)) != 0) throw AssignmentError("seller set contains an unknown buyer");
      seen |= s;
    }
    Assignment a;
    a.sets_ = std::move(sets);
    a.n_ = n;
    return a;
  }

  static Assignment from_sigma(const std::vector<int>& sigma, std::size_t m) {
    std::vector<Subset> sets(m, 0);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      if (sigma[i] == kUnserved) continue;
      if (sigma[i] < 0 || static_cast<std::size_t>(sigma[i]) >= m) throw AssignmentError("sigma names an unknown seller");
      sets[static_cast<std::size_t>(sigma[i])] |= singleton(i);
    }
    return from_sets(std::move(sets), sigma.size());
  }

  static Assignment empty(std::size_t n, std::size_t m) { return from_sets(std::vector<Subset>(m, 0), n); }

  std::size_t n() const { return n_; }
  std::size_t m() const { return sets_.size(); }
  const std::vector<Subset>& sets() const { return sets_; }
  Subset set(std::size_t j) const { return sets_[j]; }

  /// Seller serving buyer i, or kUnserved.
  int sigma(std::size_t i) const {
    for (std::size_t j = 0; j < sets_.size(); ++j) {
      if (contains(sets_[j], i)) return static_cast<int>(j);
    }
    return kUnserved;
  }

  /// (m+1)-ary word, one digit per buyer: '0' unserved, 'j' for seller j (1-based).
  std::string word() const {
    std::string w;
    for (std::size_t i = 0; i < n_; ++i) {
      const int s = sigma(i);
      w += s == kUnserved ? '0' : static_cast<char>('1' + s);
    }
    return w;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<Subset> sets_;
  std::size_t n_ = 0;
};

inline void check_capacities(const Realization& r, const Assignment& a) {
  if (a.m() != r.m() || a.n() != r.n()) throw AssignmentError("assignment shape does not match the realization");
  for (std::size_t j = 0; j < r.m(); ++j) {
    if (cardinality(a.set(j)) > r.capacity(j)) {
      throw AssignmentError("seller " + std::to_string(j) + " is assigned more buyers than its capacity");
    }
  }
}

/// Total value of served buyers minus total seller cost.
inline double realization_welfare(const Realization& r, const Assignment& a) {
  check_capacities(r, a);
  double total = 0.0;
  for (std::size_t j = 0; j < r.m(); ++j) total += r.local_welfare(j, a.set(j));
  return total;
}

}  // namespace tscs
