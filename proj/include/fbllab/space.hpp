#pragma once

// Finite-dimensional normed spaces E given by their unit ball: a symmetric
// polytope (vertex list) or an l^q ball.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fbllab/error.hpp"
#include "fbllab/search.hpp"
#include "fbllab/simplex.hpp"

namespace fbllab {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double lq_norm(std::span<const double> x, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), q);
  return std::pow(s, 1.0 / q);
}

inline std::size_t matrix_rank(Mat a, double tol = 1e-12) {
  std::size_t rank = 0;
  if (a.empty()) return 0;
  const std::size_t cols = a.front().size();
  for (std::size_t c = 0; c < cols && rank < a.size(); ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < a.size(); ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) <= tol) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r == rank) continue;
      double f = a[r][c] / a[rank][c];
      for (std::size_t j = c; j < cols; ++j) a[r][j] -= f * a[rank][j];
    }
    ++rank;
  }
  return rank;
}

struct SupResult {
  double value = 0.0;
  Vec argmax;
  bool heuristic = false;
};

class FiniteSpace {
 public:
  enum class Kind { Polytope, Lq };

  // Unit ball conv(+-v). The list is closed under negation here.
  static FiniteSpace polytope(Mat vertices, bool approximate = false) {
    if (vertices.empty()) throw Error(ErrorCode::InvalidSpace, "polytope needs vertices");
    const std::size_t d = vertices.front().size();
    if (d == 0) throw Error(ErrorCode::InvalidSpace, "polytope dimension is zero");
    Mat sym;
    auto contains = [&](const Vec& v) {
      return std::any_of(sym.begin(), sym.end(), [&](const Vec& w) { return w == v; });
    };
    for (const auto& v : vertices) {
      if (v.size() != d) throw Error(ErrorCode::DimensionMismatch, "vertices differ in dimension");
      for (double x : v)
        if (!std::isfinite(x)) throw Error(ErrorCode::InvalidSpace, "vertex coordinates must be finite");
      Vec neg(v);
      for (auto& x : neg) x = -x;
      if (!contains(v)) sym.push_back(v);
      if (!contains(neg)) sym.push_back(neg);
    }
    if (matrix_rank(sym) < d) throw Error(ErrorCode::InvalidSpace, "polytope is not full-dimensional");
    FiniteSpace s;
    s.kind_ = Kind::Polytope;
    s.d_ = d;
    s.v_ = std::move(sym);
    s.approx_ = approximate;
    return s;
  }

  static FiniteSpace lq(double q, std::size_t d) {
    if (!(q >= 1.0)) throw Error(ErrorCode::InvalidSpace, "lq ball needs q >= 1");
    if (d == 0) throw Error(ErrorCode::InvalidSpace, "dimension is zero");
    if (q == 1.0) return l1(d);
    if (std::isinf(q)) return linf(d);
    FiniteSpace s;
    s.kind_ = Kind::Lq;
    s.d_ = d;
    s.q_ = q;
    return s;
  }

  static FiniteSpace l1(std::size_t d) {
    Mat v;
    for (std::size_t i = 0; i < d; ++i) {
      Vec e(d, 0.0);
      e[i] = 1.0;
      v.push_back(e);
    }
    auto s = polytope(v);
    s.q_ = 1.0;
    return s;
  }

  static FiniteSpace linf(std::size_t d) {
    if (d > 16) throw Error(ErrorCode::DimensionTooLarge, "linf ball as polytope limited to d <= 16");
    Mat v;
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      Vec e(d);
      for (std::size_t i = 0; i < d; ++i) e[i] = (mask >> i & 1) ? -1.0 : 1.0;
      v.push_back(e);
    }
    auto s = polytope(v);
    s.q_ = std::numeric_limits<double>::infinity();
    return s;
  }

  Kind kind() const { return kind_; }
  std::size_t dim() const { return d_; }
  double q() const { return q_; }
  const Mat& vertices() const { return v_; }
  // Suprema over the ball are exact only for polytopes that are the true ball.
  bool exact() const { return kind_ == Kind::Polytope && !approx_; }

  double norm(std::span<const double> x) const {
    check(x);
    if (kind_ == Kind::Lq || !std::isnan(q_)) return lq_norm(x, q_);
    return gauge(x).first;
  }

  double dual_norm(std::span<const double> y) const {
    check(y);
    if (kind_ == Kind::Lq) return lq_norm(y, q_ / (q_ - 1.0));
    double m = 0.0;
    for (const auto& v : v_) m = std::max(m, dot(v, y));
    return m;
  }

  // y with dual_norm(y) = 1 and <y, x> = norm(x).
  Vec norming_functional(std::span<const double> x) const {
    check(x);
    Vec y(d_, 0.0);
    if (std::all_of(x.begin(), x.end(), [](double t) { return t == 0.0; })) {
      y = unit(0);
      y[0] /= dual_norm(y);
      return y;
    }
    if (kind_ == Kind::Lq) {
      const double nx = lq_norm(x, q_);
      for (std::size_t i = 0; i < d_; ++i)
        y[i] = (x[i] < 0 ? -1.0 : 1.0) * std::pow(std::abs(x[i]) / nx, q_ - 1.0);
      return y;
    }
    auto [g, duals] = gauge(x);
    for (std::size_t i = 0; i < d_; ++i) y[i] = -duals[i];
    return y;
  }

  // sup over the unit ball of phi, where phi is even and positively homogeneous.
  // convex = true lets polytopes use the vertex maximum.
  SupResult sup_homogeneous(const std::function<double(std::span<const double>)>& phi, const Mat& hints = {},
                            bool convex = true) const {
    SupResult r;
    if (kind_ == Kind::Polytope) {
      for (const auto& v : v_) {
        double val = phi(v);
        if (val > r.value || r.argmax.empty()) {
          r.value = val;
          r.argmax = v;
        }
      }
      r.heuristic = !convex || approx_;
      return r;
    }
    r.heuristic = true;
    auto ratio = [&](std::span<const double> x) {
      double n = lq_norm(x, q_);
      return n > 0 ? phi(x) / n : -std::numeric_limits<double>::infinity();
    };
    auto consider = [&](const Vec& x) {
      double val = ratio(x);
      if (val > r.value || r.argmax.empty()) {
        r.value = val;
        r.argmax = x;
      }
    };
    if (d_ == 2) {
      // Angular grid, then golden-section refinement around the best cells.
      constexpr int N = 240;
      const double h = std::numbers::pi / N;
      auto at = [&](double t) { return ratio(Vec{std::cos(t), std::sin(t)}); };
      std::vector<std::pair<double, int>> grid;
      for (int i = 0; i < N; ++i) grid.emplace_back(at(i * h), i);
      std::partial_sort(grid.begin(), grid.begin() + 4, grid.end(),
                        [](auto& a, auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
      for (int k = 0; k < 4; ++k) {
        double a = (grid[k].second - 1) * h, b = (grid[k].second + 1) * h;
        const double g = (std::sqrt(5.0) - 1) / 2;
        double c = b - g * (b - a), d = a + g * (b - a), fc = at(c), fd = at(d);
        for (int it = 0; it < 50; ++it) {
          if (fc >= fd) {
            b = d, d = c, fd = fc;
            c = b - g * (b - a), fc = at(c);
          } else {
            a = c, c = d, fc = fd;
            d = a + g * (b - a), fd = at(d);
          }
        }
        consider(Vec{std::cos(grid[k].second * h), std::sin(grid[k].second * h)});
        consider(Vec{std::cos((a + b) / 2), std::sin((a + b) / 2)});
      }
      for (const auto& x : hints) consider(x);
      return r;
    }
    Mat starts = hints;
    for (std::size_t i = 0; i < d_; ++i) starts.push_back(unit(i));
    Rng rng(0x5eedULL + d_);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 4; ++k) {
      Vec x(d_);
      for (auto& t : x) t = nd(rng);
      starts.push_back(x);
    }
    AscentOptions opt;
    opt.min_step = 1e-10;
    opt.max_evals = 4000;
    for (const auto& s : starts) {
      if (ratio(s) == -std::numeric_limits<double>::infinity()) continue;
      auto a = perturbation_ascent([&](const Vec& x) { return ratio(x); }, s, rng, opt);
      consider(a.x);
    }
    return r;
  }

 private:
  FiniteSpace() = default;

  Vec unit(std::size_t i) const {
    Vec e(d_, 0.0);
    e[i] = 1.0;
    return e;
  }

  void check(std::span<const double> x) const {
    if (x.size() != d_) throw Error(ErrorCode::DimensionMismatch, "vector dimension differs from space dimension");
  }

  // min sum(l) s.t. sum l_v v = x, l >= 0; duals give a norming functional.
  std::pair<double, Vec> gauge(std::span<const double> x) const {
    std::vector<double> c(v_.size(), -1.0);
    std::vector<LpRow> rows;
    for (std::size_t i = 0; i < d_; ++i) {
      LpRow row{Vec(v_.size()), Relation::Equal, x[i]};
      for (std::size_t k = 0; k < v_.size(); ++k) row.a[k] = v_[k][i];
      rows.push_back(std::move(row));
    }
    auto res = solve_lp(c, rows);
    if (res.status != LpResult::Status::Optimal) throw Error(ErrorCode::NumericalInstability, "gauge LP failed");
    return {-res.objective, res.duals};
  }

  Kind kind_ = Kind::Polytope;
  std::size_t d_ = 0;
  double q_ = std::numeric_limits<double>::quiet_NaN();
  Mat v_;
  bool approx_ = false;
};

}  // namespace fbllab
