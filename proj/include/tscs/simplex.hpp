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
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tscs/common.hpp"

namespace tscs::lp {

enum class Sense { le, ge, eq };

struct Constraint {
  std::vector<double> coeffs;  ///< dense, one entry per variable
  Sense sense = Sense::le;
  double rhs = 0.0;
};

/// maximize objective . x  subject to rows, x >= 0.
struct Problem {
  std::vector<double> objective;
  std::vector<Constraint> rows;
};

enum class Status { optimal, infeasible, unbounded };

struct Solution {
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  /// Shadow price of each row. Nonnegative for <= rows at an optimum,
  /// nonpositive for >= rows, free for equalities.
  std::vector<double> duals;
  std::size_t pivots = 0;
};

namespace detail {

inline constexpr double kEnter = 1e-11;
inline constexpr double kPivot = 1e-10;
inline constexpr double kRatioTie = 1e-12;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_(rows * cols, 0.0), rhs_(rows, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * cols_ + c]; }
  double& rhs(std::size_t r) { return rhs_[r]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t pr, std::size_t pc, std::vector<double>& reduced) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c < cols_; ++c) at(pr, c) *= inv;
    rhs_[pr] *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < cols_; ++c) at(r, c) -= f * at(pr, c);
      rhs_[r] -= f * rhs_[pr];
      at(r, pc) = 0.0;
    }
    const double f = reduced[pc];
    if (f != 0.0) {
      for (std::size_t c = 0; c < cols_; ++c) reduced[c] -= f * at(pr, c);
      reduced[pc] = 0.0;
    }
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> t_;
  std::vector<double> rhs_;
};

}  // namespace detail

/// Two-phase dense tableau simplex with Bland's rule: the entering column is
/// the lowest-index improving one and ratio ties leave by lowest basic index.
/// Deterministic for a fixed row and column order, and never cycles.
inline Solution maximize(const Problem& problem) {
  using detail::kEnter;
  using detail::kPivot;
  using detail::kRatioTie;

  const std::size_t nvars = problem.objective.size();
  const std::size_t nrows = problem.rows.size();

  // Column layout: structural | slack or surplus per inequality | artificial per >= or = row.
  std::vector<double> sign(nrows, 1.0);
  std::vector<Sense> sense(nrows);
  std::vector<std::size_t> slack_col(nrows, SIZE_MAX), art_col(nrows, SIZE_MAX);
  std::size_t next = nvars;
  for (std::size_t r = 0; r < nrows; ++r) {
    const auto& row = problem.rows[r];
    if (row.coeffs.size() != nvars) throw DomainError("LP row " + std::to_string(r) + " has the wrong width");
    sense[r] = row.sense;
    if (row.rhs < 0.0) {
      sign[r] = -1.0;
      if (row.sense == Sense::le) sense[r] = Sense::ge;
      else if (row.sense == Sense::ge) sense[r] = Sense::le;
    }
    if (sense[r] != Sense::eq) slack_col[r] = next++;
  }
  const std::size_t first_art = next;
  for (std::size_t r = 0; r < nrows; ++r) {
    if (sense[r] != Sense::le) art_col[r] = next++;
  }
  const std::size_t ncols = next;

  detail::Tableau tab(nrows, ncols);
  std::vector<std::size_t> basis(nrows);
  for (std::size_t r = 0; r < nrows; ++r) {
    const auto& row = problem.rows[r];
    for (std::size_t c = 0; c < nvars; ++c) tab.at(r, c) = sign[r] * row.coeffs[c];
    tab.rhs(r) = sign[r] * row.rhs;
    if (sense[r] == Sense::le) {
      tab.at(r, slack_col[r]) = 1.0;
      basis[r] = slack_col[r];
    } else {
      if (sense[r] == Sense::ge) tab.at(r, slack_col[r]) = -1.0;
      tab.at(r, art_col[r]) = 1.0;
      basis[r] = art_col[r];
    }
  }

  Solution sol;
  std::vector<double> reduced(ncols, 0.0);
  auto price_out = [&](const std::vector<double>& cost) {
    reduced = cost;
    for (std::size_t r = 0; r < nrows; ++r) {
      const double cb = cost[basis[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < ncols; ++c) reduced[c] -= cb * tab.at(r, c);
    }
  };

  // Returns false when unbounded.
  auto run = [&](std::size_t enter_limit) {
    for (;;) {
      std::size_t pc = SIZE_MAX;
      for (std::size_t c = 0; c < enter_limit; ++c) {
        if (reduced[c] > kEnter) {
          pc = c;
          break;
        }
      }
      if (pc == SIZE_MAX) return true;
      std::size_t pr = SIZE_MAX;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < nrows; ++r) {
        const double a = tab.at(r, pc);
        if (a <= kPivot) continue;
        const double ratio = std::max(0.0, tab.rhs(r)) / a;
        if (ratio < best - kRatioTie || (ratio <= best + kRatioTie && basis[r] < basis[pr])) {
          best = ratio;
          pr = r;
        }
      }
      if (pr == SIZE_MAX) return false;
      tab.pivot(pr, pc, reduced);
      basis[pr] = pc;
      ++sol.pivots;
    }
  };

  if (first_art < ncols) {
    std::vector<double> phase1(ncols, 0.0);
    for (std::size_t c = first_art; c < ncols; ++c) phase1[c] = -1.0;
    price_out(phase1);
    run(ncols);
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < nrows; ++r) {
      if (basis[r] >= first_art) infeasibility += tab.rhs(r);
    }
    if (infeasibility > 1e-9) {
      sol.status = Status::infeasible;
      return sol;
    }
    // Drive degenerate artificials out; rows where that is impossible are redundant.
    for (std::size_t r = 0; r < nrows; ++r) {
      if (basis[r] < first_art) continue;
      for (std::size_t c = 0; c < first_art; ++c) {
        if (std::abs(tab.at(r, c)) > kPivot) {
          tab.pivot(r, c, reduced);
          basis[r] = c;
          break;
        }
      }
    }
  }

  std::vector<double> phase2(ncols, 0.0);
  for (std::size_t c = 0; c < nvars; ++c) phase2[c] = problem.objective[c];
  price_out(phase2);
  if (!run(first_art)) {
    sol.status = Status::unbounded;
    return sol;
  }

  sol.status = Status::optimal;
  sol.x.assign(nvars, 0.0);
  for (std::size_t r = 0; r < nrows; ++r) {
    if (basis[r] < nvars) sol.x[basis[r]] = tab.rhs(r);
  }
  sol.objective = 0.0;
  for (std::size_t c = 0; c < nvars; ++c) sol.objective += problem.objective[c] * sol.x[c];
  sol.duals.assign(nrows, 0.0);
  for (std::size_t r = 0; r < nrows; ++r) {
    double pi = 0.0;
    if (sense[r] == Sense::le) pi = -reduced[slack_col[r]];
    else pi = -reduced[art_col[r]];
    sol.duals[r] = sign[r] * pi;
  }
  return sol;
}

}  // namespace tscs::lp
