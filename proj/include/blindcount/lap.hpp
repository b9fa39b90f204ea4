#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "blindcount/common.hpp"

namespace blindcount {

// Rectangular assignment cost matrix: rows are predictions, columns are
// labels. Every label must be assignable to a distinct prediction, so
// cols <= rows.
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major

  CostMatrix() = default;
  CostMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<size_t>(r) * c, fill) {}

  double& at(int i, int j) { return values[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return values[static_cast<size_t>(i) * cols + j]; }

  void validate() const {
    require(rows >= 1 && cols >= 1, "CostMatrix: rows and cols must be >= 1");
    require(cols <= rows, "CostMatrix: cols must not exceed rows");
    require(values.size() == static_cast<size_t>(rows) * cols, "CostMatrix: bad storage size");
    for (double v : values)
      require(std::isfinite(v) && v >= 0.0, "CostMatrix: entries must be finite and >= 0");
  }
};

// One pair per label column, prediction indices pairwise distinct.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (prediction index, label index)
  double total_cost = 0.0;
};

namespace detail {

// Shortest-augmenting-path solve over a label suffix and a row subset.
// Labels col_begin..cols-1 each get a distinct row from `rows`. Returns the
// minimal total and the chosen row per label.
struct LapResult {
  double cost = 0.0;
  std::vector<int> row_for_label;
};

inline LapResult lap_subproblem(const CostMatrix& c, const std::vector<int>& rows, int col_begin) {
  const int nlab = c.cols - col_begin;
  const int nrow = static_cast<int>(rows.size());
  LapResult res;
  if (nlab <= 0) return res;
  require(nlab <= nrow, "lap: fewer rows than labels");

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(nlab) + 1, 0.0);
  std::vector<double> v(static_cast<size_t>(nrow) + 1, 0.0);
  std::vector<int> match(static_cast<size_t>(nrow) + 1, 0);  // label (1-based) held by row slot
  std::vector<int> way(static_cast<size_t>(nrow) + 1, 0);

  for (int t = 1; t <= nlab; ++t) {
    match[0] = t;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(nrow) + 1, inf);
    std::vector<char> used(static_cast<size_t>(nrow) + 1, 0);
    do {
      used[j0] = 1;
      const int t0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= nrow; ++j) {
        if (used[j]) continue;
        const double cur = c.at(rows[j - 1], col_begin + t0 - 1) - u[t0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= nrow; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  res.row_for_label.assign(static_cast<size_t>(nlab), -1);
  for (int j = 1; j <= nrow; ++j) {
    if (match[j] > 0) res.row_for_label[static_cast<size_t>(match[j]) - 1] = rows[j - 1];
  }
  for (int t = 0; t < nlab; ++t) res.cost += c.at(res.row_for_label[t], col_begin + t);
  return res;
}

inline double tie_eps(double reference) { return 1e-9 * std::max(1.0, std::abs(reference)); }

}  // namespace detail

// Globally optimal label->prediction assignment. Among equal-cost optima the
// returned pairing is lexicographically smallest in label order by prediction
// index; the refinement pass below re-solves suffix subproblems to enforce
// that, since the augmenting-path solver itself breaks ties arbitrarily.
inline Assignment solve_lap(const CostMatrix& costs) {
  costs.validate();
  const int m = costs.cols;

  std::vector<int> avail(static_cast<size_t>(costs.rows));
  std::iota(avail.begin(), avail.end(), 0);

  double budget = detail::lap_subproblem(costs, avail, 0).cost;
  double fixed_cost = 0.0;

  Assignment out;
  out.pairs.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    int chosen = -1;
    std::vector<int> rest_rows(avail.size() - 1);
    for (size_t idx = 0; idx < avail.size(); ++idx) {
      const int i = avail[idx];
      rest_rows.clear();
      for (size_t k2 = 0; k2 < avail.size(); ++k2)
        if (k2 != idx) rest_rows.push_back(avail[k2]);
      const double rest =
          (j + 1 < m) ? detail::lap_subproblem(costs, rest_rows, j + 1).cost : 0.0;
      const double total = fixed_cost + costs.at(i, j) + rest;
      if (total <= budget + detail::tie_eps(budget)) {
        chosen = i;
        budget = total;
        break;
      }
    }
    if (chosen == -1) {
      // Numerical fallback: accept the subproblem's own optimum for this label.
      chosen = detail::lap_subproblem(costs, avail, j).row_for_label[0];
    }
    out.pairs.emplace_back(chosen, j);
    fixed_cost += costs.at(chosen, j);
    avail.erase(std::find(avail.begin(), avail.end(), chosen));
  }
  out.total_cost = 0.0;
  for (const auto& [i, j] : out.pairs) out.total_cost += costs.at(i, j);
  return out;
}

// Exhaustive oracle over all injective label->prediction maps. Same
// tie-break rule as solve_lap. Guarded to small instances.
inline Assignment brute_force_lap(const CostMatrix& costs) {
  costs.validate();
  require(costs.rows <= 8, "brute_force_lap: rows must be <= 8");
  const int m = costs.cols;
  const int n = costs.rows;

  std::vector<int> current(static_cast<size_t>(m), -1);
  std::vector<char> taken(static_cast<size_t>(n), 0);

  double best_cost = std::numeric_limits<double>::infinity();
  // Pass 1: exact minimum.
  auto min_pass = [&](auto&& self, int j, double acc) -> void {
    if (j == m) {
      best_cost = std::min(best_cost, acc);
      return;
    }
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      taken[i] = 1;
      self(self, j + 1, acc + costs.at(i, j));
      taken[i] = 0;
    }
  };
  min_pass(min_pass, 0, 0.0);

  // Pass 2: lexicographically first pairing within tolerance of the minimum.
  const double eps = detail::tie_eps(best_cost);
  std::vector<int> found;
  auto lex_pass = [&](auto&& self, int j, double acc) -> bool {
    if (j == m) {
      if (acc <= best_cost + eps) {
        found = current;
        return true;
      }
      return false;
    }
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      taken[i] = 1;
      current[j] = i;
      const bool done = self(self, j + 1, acc + costs.at(i, j));
      taken[i] = 0;
      if (done) return true;
    }
    return false;
  };
  lex_pass(lex_pass, 0, 0.0);

  Assignment out;
  out.pairs.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    out.pairs.emplace_back(found[j], j);
    out.total_cost += costs.at(found[j], j);
  }
  return out;
}

}  // namespace blindcount
