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
#include <bit>
#include <cmath>
#include <limits>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tscs/common.hpp"

namespace tscs {

/// Seller cost over subsets of buyers. Either additive (one nonnegative cost
/// per buyer) or tabular (one entry per subset, indexed by bitmask). The
/// table is shared between copies; instances are immutable.
class CostFunction {
 public:
  enum class Kind { additive, tabular };

  CostFunction() : CostFunction(additive({})) {}

  static CostFunction additive(std::vector<double> per_buyer) {
    require_buyers(per_buyer.size());
    for (std::size_t i = 0; i < per_buyer.size(); ++i) {
      if (!std::isfinite(per_buyer[i]) || per_buyer[i] < 0.0) {
        throw DomainError("additive cost for buyer " + std::to_string(i) + " must be finite and >= 0");
      }
    }
    const std::size_t n = per_buyer.size();
    return CostFunction(Kind::additive, n, std::make_shared<const std::vector<double>>(std::move(per_buyer)));
  }

  static CostFunction tabular(std::size_t n, std::vector<double> table) {
    require_buyers(n);
    if (table.size() != (std::size_t{1} << n)) {
      throw DomainError("tabular cost on " + std::to_string(n) + " buyers needs " +
                        std::to_string(std::size_t{1} << n) + " entries, got " + std::to_string(table.size()));
    }
    if (table[0] != 0.0) throw DomainError("cost of the empty set must be exactly 0");
    for (std::size_t s = 0; s < table.size(); ++s) {
      if (!std::isfinite(table[s]) || table[s] < 0.0) {
        throw DomainError("tabular cost of subset " + std::to_string(s) + " must be finite and >= 0");
      }
    }
    return CostFunction(Kind::tabular, n, std::make_shared<const std::vector<double>>(std::move(table)));
  }

  Kind kind() const { return kind_; }
  bool is_additive() const { return kind_ == Kind::additive; }
  std::size_t ground_size() const { return n_; }

  /// Per-buyer costs (additive) or the full table (tabular).
  std::span<const double> data() const { return *data_; }

  double operator()(Subset s) const {
    if (kind_ == Kind::tabular) return (*data_)[s];
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (contains(s, i)) total += (*data_)[i];
    }
    return total;
  }

  /// Dense table of all 2^n values.
  std::vector<double> to_table() const {
    if (kind_ == Kind::tabular) return *data_;
    std::vector<double> out(std::size_t{1} << n_, 0.0);
    for (Subset s = 1; s < out.size(); ++s) {
      const std::size_t low = static_cast<std::size_t>(std::countr_zero(s));
      out[s] = out[s & (s - 1)] + (*data_)[low];
    }
    return out;
  }

  /// Copy with one entry replaced: a per-buyer cost for additive functions,
  /// a subset entry for tabular ones.
  CostFunction with_entry(std::size_t index, double value) const {
    std::vector<double> copy = *data_;
    copy.at(index) = value;
    return kind_ == Kind::additive ? additive(std::move(copy)) : tabular(n_, std::move(copy));
  }

  friend bool operator==(const CostFunction& a, const CostFunction& b) {
    return a.kind_ == b.kind_ && a.n_ == b.n_ && *a.data_ == *b.data_;
  }

 private:
  CostFunction(Kind kind, std::size_t n, std::shared_ptr<const std::vector<double>> data)
      : kind_(kind), n_(n), data_(std::move(data)) {}

  Kind kind_;
  std::size_t n_;
  std::shared_ptr<const std::vector<double>> data_;
};

inline double eval_cost(const CostFunction& c, Subset s) {
  if ((s & ~full_set(c.ground_size())) != 0) {
    throw DomainError("subset " + std::to_string(s) + " is outside the ground set of " +
                      std::to_string(c.ground_size()) + " buyers");
  }
  return c(s);
}

/// Marginal-form submodularity test: c(S+i) - c(S) >= c(S+i+k) - c(S+k) for
/// all S, i, k outside S. Equivalent to the lattice inequality.
inline bool is_submodular(const CostFunction& c) {
  if (c.is_additive()) return true;
  const std::size_t n = c.ground_size();
  const auto t = c.data();
  for (Subset s = 0; s <= full_set(n); ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(s, i)) continue;
      const Subset si = s | singleton(i);
      const double gain_i = t[si] - t[s];
      for (std::size_t k = i + 1; k < n; ++k) {
        if (contains(s, k)) continue;
        const Subset sk = s | singleton(k);
        if (gain_i < t[si | singleton(k)] - t[sk] - kTol) return false;
      }
    }
    if (s == full_set(n)) break;
  }
  return true;
}

struct SetFunctionMin {
  Subset minimizer = 0;
  double minimum = 0.0;
};

using SetFunction = std::function<double(Subset)>;

/// Global minimum of a set function over all 2^n subsets. Exhaustive; ties go
/// to the smallest bitmask.
inline SetFunctionMin minimize_submodular(const SetFunction& f, std::size_t n) {
  require_buyers(n);
  SetFunctionMin best{0, f(0)};
  for (Subset s = 1; s <= full_set(n) && n > 0; ++s) {
    const double v = f(s);
    if (v < best.minimum - 1e-12) best = {s, v};
    if (s == full_set(n)) break;
  }
  return best;
}

/// A maximizer of c(S) - sum_{i in S} p_i, smallest bitmask on ties.
inline Subset ngs_demand(const CostFunction& c, std::span<const double> prices) {
  const std::size_t n = c.ground_size();
  require_buyers(n);
  if (prices.size() != n) throw DomainError("price vector length must equal the number of buyers");
  Subset best = 0;
  double best_value = 0.0;
  for (Subset s = 1; s <= full_set(n) && n > 0; ++s) {
    double v = c(s);
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(s, i)) v -= prices[i];
    }
    if (v > best_value + 1e-12) {
      best = s;
      best_value = v;
    }
    if (s == full_set(n)) break;
  }
  return best;
}

/// Every maximizer of c(S) - p(S) within kTol, as a membership table.
inline std::vector<char> ngs_demand_set(const CostFunction& c, std::span<const double> prices) {
  const std::size_t n = c.ground_size();
  std::vector<double> obj(std::size_t{1} << n);
  double best = -std::numeric_limits<double>::infinity();
  for (Subset s = 0; s < obj.size(); ++s) {
    double v = c(s);
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(s, i)) v -= prices[i];
    }
    obj[s] = v;
    best = std::max(best, v);
  }
  std::vector<char> member(obj.size(), 0);
  for (Subset s = 0; s < obj.size(); ++s) member[s] = obj[s] >= best - kTol ? 1 : 0;
  return member;
}

struct NgsViolation {
  std::size_t high_index = 0;  ///< grid index of p
  std::size_t low_index = 0;   ///< grid index of q <= p
  Subset demanded = 0;         ///< S in D(p) with no valid completion in D(q)
};

struct NgsCheckResult {
  bool holds = true;
  std::optional<NgsViolation> violation;
  explicit operator bool() const { return holds; }
};

/// Falsification aid for the negative gross substitutes condition restricted
/// to a finite grid. For each grid pair q <= p and each S in D(p), with A the
/// buyers whose price strictly dropped, some T subset of A must make
/// (S \ A) | T demanded at q.
inline NgsCheckResult check_ngs_local(const CostFunction& c, const std::vector<std::vector<double>>& grid) {
  const std::size_t n = c.ground_size();
  require_buyers(n);
  std::vector<std::vector<char>> demand;
  demand.reserve(grid.size());
  for (const auto& p : grid) {
    if (p.size() != n) throw DomainError("grid price vector length must equal the number of buyers");
    demand.push_back(ngs_demand_set(c, p));
  }
  const std::size_t subsets = std::size_t{1} << n;
  for (std::size_t hi = 0; hi < grid.size(); ++hi) {
    for (std::size_t lo = 0; lo < grid.size(); ++lo) {
      if (lo == hi) continue;
      Subset dropped = 0;
      bool dominated = true;
      for (std::size_t i = 0; i < n && dominated; ++i) {
        if (grid[lo][i] > grid[hi][i]) dominated = false;
        if (grid[lo][i] < grid[hi][i]) dropped |= singleton(i);
      }
      if (!dominated) continue;
      for (Subset s = 0; s < subsets; ++s) {
        if (!demand[hi][s]) continue;
        const Subset kept = s & ~dropped;
        bool found = false;
        // Enumerate T over subsets of the dropped buyers.
        for (Subset t = dropped;; t = (t - 1) & dropped) {
          if (demand[lo][kept | t]) {
            found = true;
            break;
          }
          if (t == 0) break;
        }
        if (!found) return {false, NgsViolation{hi, lo, s}};
      }
    }
  }
  return {};
}

/// Default grid: each coordinate ranges over that buyer's marginal costs
/// c(S+i) - c(S), each also shifted by +-1e-3. Throws when the product grid
/// exceeds max_points.
inline std::vector<std::vector<double>> default_ngs_grid(const CostFunction& c, std::size_t max_points = 20'000) {
  const std::size_t n = c.ground_size();
  require_buyers(n);
  std::vector<std::vector<double>> axes(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double>& axis = axes[i];
    for (Subset s = 0; s <= full_set(n); ++s) {
      if (!contains(s, i)) {
        const double m = c(s | singleton(i)) - c(s);
        axis.insert(axis.end(), {m - 1e-3, m, m + 1e-3});
      }
      if (s == full_set(n)) break;
    }
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               axis.end());
  }
  std::size_t points = 1;
  for (const auto& axis : axes) {
    if (points > max_points / std::max<std::size_t>(1, axis.size())) {
      throw SizeError("default NGS grid exceeds " + std::to_string(max_points) + " price vectors");
    }
    points *= axis.size();
  }
  std::vector<std::vector<double>> grid;
  grid.reserve(points);
  std::vector<std::size_t> digit(n, 0);
  for (std::size_t k = 0; k < points; ++k) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = axes[i][digit[i]];
    grid.push_back(std::move(p));
    for (std::size_t i = n; i-- > 0;) {
      if (++digit[i] < axes[i].size()) break;
      digit[i] = 0;
    }
  }
  return grid;
}

}  // namespace tscs
