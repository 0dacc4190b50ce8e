#pragma once

// Dense two-phase tableau simplex with Bland's rule.
//   maximize c.x  subject to  a_i.x (<=|>=|=) b_i,  x >= 0
// Optimal results also carry the row duals y with c.x* = b.y.

#include <cmath>
#include <limits>
#include <vector>

#include "fbllab/error.hpp"

namespace fbllab {

enum class Relation { LessEq, GreaterEq, Equal };

struct LpRow {
  std::vector<double> a;
  Relation rel;
  double b;
};

struct LpOptions {
  double pivot_tol = 1e-10;
  double opt_tol = 1e-11;
  double feas_tol = 1e-9;
  long max_pivots = 200000;
};

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded } status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> duals;
  long pivots = 0;
};

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), w_(cols + 1), t_((rows + 1) * (cols + 1), 0.0) {}
  double& at(std::size_t r, std::size_t c) { return t_[r * w_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * w_ + c]; }
  double& rhs(std::size_t r) { return t_[r * w_ + w_ - 1]; }
  double* row(std::size_t r) { return &t_[r * w_]; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return w_ - 1; }
  std::size_t obj() const { return m_; }

  void pivot(std::size_t pr, std::size_t pc) {
    double* p = row(pr);
    const double inv = 1.0 / p[pc];
    for (std::size_t j = 0; j < w_; ++j) p[j] *= inv;
    p[pc] = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      double* q = row(r);
      const double f = q[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w_; ++j) q[j] -= f * p[j];
      q[pc] = 0.0;
    }
  }

 private:
  std::size_t m_, w_;
  std::vector<double> t_;
};

}  // namespace detail

inline LpResult solve_lp(const std::vector<double>& c, const std::vector<LpRow>& rows, const LpOptions& opt = {}) {
  const std::size_t n = c.size(), m = rows.size();
  for (const auto& r : rows)
    if (r.a.size() != n) throw Error(ErrorCode::DimensionMismatch, "LP row length differs from objective");

  // Column layout: structural, then one slack/surplus per inequality, then artificials.
  std::vector<double> sign(m, 1.0);
  std::vector<Relation> rel(m);
  std::size_t nslack = 0, nart = 0;
  for (std::size_t i = 0; i < m; ++i) {
    rel[i] = rows[i].rel;
    if (rows[i].b < 0) {
      sign[i] = -1.0;
      if (rel[i] == Relation::LessEq) rel[i] = Relation::GreaterEq;
      else if (rel[i] == Relation::GreaterEq) rel[i] = Relation::LessEq;
    }
    if (rel[i] != Relation::Equal) ++nslack;
    if (rel[i] != Relation::LessEq) ++nart;
  }
  const std::size_t ncols = n + nslack + nart;
  detail::Tableau T(m, ncols);
  std::vector<std::size_t> basis(m), idcol(m);
  std::vector<char> artificial(ncols, 0);
  std::size_t s = n, a = n + nslack;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T.at(i, j) = sign[i] * rows[i].a[j];
    T.rhs(i) = sign[i] * rows[i].b;
    if (rel[i] == Relation::LessEq) {
      T.at(i, s) = 1.0;
      idcol[i] = s++;
    } else {
      if (rel[i] == Relation::GreaterEq) T.at(i, s++) = -1.0;
      T.at(i, a) = 1.0;
      artificial[a] = 1;
      idcol[i] = a++;
    }
    basis[i] = idcol[i];
  }

  LpResult res;
  auto load_objective = [&](const std::vector<double>& cost) {
    double* z = T.row(T.obj());
    for (std::size_t j = 0; j <= ncols; ++j) z[j] = 0.0;
    for (std::size_t j = 0; j < ncols; ++j) z[j] = -cost[j];
    for (std::size_t r = 0; r < m; ++r) {
      const double cb = cost[basis[r]];
      if (cb == 0.0) continue;
      const double* q = T.row(r);
      for (std::size_t j = 0; j <= ncols; ++j) z[j] += cb * q[j];
    }
  };

  // Returns false when unbounded.
  auto iterate = [&](bool allow_artificial) {
    for (;;) {
      const double* z = T.row(T.obj());
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (!allow_artificial && artificial[j]) continue;
        if (z[j] < -opt.opt_tol) {
          enter = j;
          break;
        }
      }
      if (enter == ncols) return true;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m; ++r) {
        const double v = T.at(r, enter);
        if (v > opt.pivot_tol) best = std::min(best, T.rhs(r) / v);
      }
      if (best == std::numeric_limits<double>::infinity()) return false;
      // Bland: among tied rows the smallest basic index leaves.
      std::size_t leave = m;
      for (std::size_t r = 0; r < m; ++r) {
        const double v = T.at(r, enter);
        if (v <= opt.pivot_tol || T.rhs(r) / v > best + 1e-13 * (1.0 + std::abs(best))) continue;
        if (leave == m || basis[r] < basis[leave]) leave = r;
      }
      T.pivot(leave, enter);
      basis[leave] = enter;
      if (++res.pivots > opt.max_pivots) throw Error(ErrorCode::NumericalInstability, "simplex pivot limit reached");
    }
  };

  if (nart > 0) {
    std::vector<double> cost(ncols, 0.0);
    for (std::size_t j = 0; j < ncols; ++j)
      if (artificial[j]) cost[j] = -1.0;
    load_objective(cost);
    iterate(true);
    if (T.rhs(T.obj()) < -opt.feas_tol) {
      res.status = LpResult::Status::Infeasible;
      return res;
    }
    // Push zero-level artificials out of the basis where a structural pivot exists.
    for (std::size_t r = 0; r < m; ++r) {
      if (!artificial[basis[r]]) continue;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (artificial[j] || std::abs(T.at(r, j)) <= opt.pivot_tol) continue;
        T.pivot(r, j);
        basis[r] = j;
        break;
      }
    }
  }

  std::vector<double> cost(ncols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = c[j];
  load_objective(cost);
  if (!iterate(false)) {
    res.status = LpResult::Status::Unbounded;
    return res;
  }

  res.status = LpResult::Status::Optimal;
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) res.x[basis[r]] = T.rhs(r);
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  res.duals.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double y = 0.0;
    for (std::size_t r = 0; r < m; ++r) y += cost[basis[r]] * T.at(r, idcol[i]);
    res.duals[i] = sign[i] * y;
  }
  return res;
}

}  // namespace fbllab
