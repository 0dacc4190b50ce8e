#pragma once

// Positive projections onto spans of disjoint sequences in (sum l^p(k))_inf
// with Gamma blocks, and the Schreier-set embedding check in weak l^p.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "fbllab/error.hpp"
#include "fbllab/search.hpp"
#include "fbllab/seqnorm.hpp"
#include "fbllab/simplex.hpp"
#include "fbllab/space.hpp"

namespace fbllab {

class LpSumSpace {
 public:
  LpSumSpace(std::size_t blocks, std::size_t k, double p) : G_(blocks), k_(k), p_(p) {
    PExponent{p};
    if (blocks == 0 || k == 0) throw Error(ErrorCode::InvalidArgument, "blocks and block size must be positive");
  }
  std::size_t blocks() const { return G_; }
  std::size_t block_size() const { return k_; }
  std::size_t dim() const { return G_ * k_; }
  double p() const { return p_; }

  std::span<const double> block(std::span<const double> x, std::size_t g) const { return x.subspan(g * k_, k_); }
  double block_norm(std::span<const double> x, std::size_t g) const { return lq_norm(block(x, g), p_); }
  double norm(std::span<const double> x) const {
    if (x.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "vector length differs from space dimension");
    double m = 0.0;
    for (std::size_t g = 0; g < G_; ++g) m = std::max(m, block_norm(x, g));
    return m;
  }

 private:
  std::size_t G_, k_;
  double p_;
};

struct RefutationCheck {
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  bool refuted = false;
};

// Non-negative, pairwise disjoint x_1..x_m with c ||a||_p < ||sum a_n x_n|| <= ||a||_p.
class DisjointSystem {
 public:
  DisjointSystem(LpSumSpace space, Mat xs, double c, int samples = 1000, std::uint64_t seed = 0)
      : space_(space), x_(std::move(xs)), c_(c) {
    if (x_.empty()) throw Error(ErrorCode::InvalidArgument, "system needs at least one vector");
    if (!(c > 0)) throw Error(ErrorCode::InvalidArgument, "c must be positive");
    for (const auto& x : x_) {
      if (x.size() != space_.dim()) throw Error(ErrorCode::DimensionMismatch, "vector length differs from space dimension");
      for (double t : x)
        if (t < 0 || !std::isfinite(t)) throw Error(ErrorCode::PositivityViolation, "system vectors must be non-negative");
      if (!(space_.norm(x) > 0)) throw Error(ErrorCode::InvalidArgument, "system vectors must be non-zero");
      if (space_.norm(x) > 1.0 + 1e-12) throw Error(ErrorCode::ConstantRefuted, "||x_n|| > 1 breaks the upper estimate");
    }
    for (std::size_t j = 0; j < space_.dim(); ++j) {
      int owners = 0;
      for (const auto& x : x_) owners += x[j] != 0.0;
      if (owners > 1) throw Error(ErrorCode::NotDisjoint, "vectors share coordinate " + std::to_string(j));
    }
    check_ = sample_ratios(samples, seed);
    if (check_.min_ratio <= c_) check_.refuted = true;
    if (check_.refuted) throw Error(ErrorCode::ConstantRefuted, "sampling finds ||sum a x|| <= c ||a||_p");
  }

  const LpSumSpace& space() const { return space_; }
  const Mat& vectors() const { return x_; }
  std::size_t size() const { return x_.size(); }
  double c() const { return c_; }
  const RefutationCheck& sampling() const { return check_; }

  RefutationCheck sample_ratios(int samples, std::uint64_t seed) const {
    RefutationCheck r;
    Rng rng(derive_seed(seed, 0xd15));
    std::normal_distribution<double> nd;
    const double p = space_.p();
    Vec a(x_.size()), y(space_.dim());
    for (int s = 0; s < samples; ++s) {
      for (auto& t : a) t = nd(rng);
      if (s < static_cast<int>(x_.size())) std::fill(a.begin(), a.end(), 0.0), a[s] = 1.0;
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t n = 0; n < x_.size(); ++n)
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += a[n] * x_[n][j];
      double na = lq_norm(a, p);
      if (!(na > 0)) continue;
      double ratio = space_.norm(y) / na;
      r.min_ratio = std::min(r.min_ratio, ratio);
      r.max_ratio = std::max(r.max_ratio, ratio);
    }
    return r;
  }

 private:
  LpSumSpace space_;
  Mat x_;
  double c_;
  RefutationCheck check_;
};

// S(g, n) = ||block g of x_n||_p^p.
inline Mat build_S_matrix(const DisjointSystem& sys) {
  const auto& sp = sys.space();
  Mat S(sp.blocks(), Vec(sys.size()));
  for (std::size_t g = 0; g < sp.blocks(); ++g)
    for (std::size_t n = 0; n < sys.size(); ++n) S[g][n] = std::pow(sp.block_norm(sys.vectors()[n], g), sp.p());
  return S;
}

struct AlphaResult {
  bool feasible = false;
  Vec alpha;       // distribution over blocks with S^T alpha >= c^p
  Vec separator;   // y >= 0, sum 1, with max_g (S y)_g < c^p, when infeasible
  double value = 0.0;  // max_alpha min_n (S^T alpha)_n
};

// max t s.t. (S^T alpha)_n >= t, sum alpha = 1, alpha >= 0; feasible iff t >= c^p.
inline AlphaResult find_alpha(const Mat& S, double c, double p) {
  if (S.empty() || S.front().empty()) throw Error(ErrorCode::InvalidArgument, "S is empty");
  const std::size_t G = S.size(), m = S.front().size();
  Vec cost(G + 1, 0.0);
  cost[G] = 1.0;
  std::vector<LpRow> rows;
  for (std::size_t n = 0; n < m; ++n) {
    LpRow r{Vec(G + 1, 0.0), Relation::GreaterEq, 0.0};
    for (std::size_t g = 0; g < G; ++g) r.a[g] = S[g][n];
    r.a[G] = -1.0;
    rows.push_back(std::move(r));
  }
  LpRow sum{Vec(G + 1, 1.0), Relation::Equal, 1.0};
  sum.a[G] = 0.0;
  rows.push_back(sum);
  auto res = solve_lp(cost, rows);
  if (res.status != LpResult::Status::Optimal) throw Error(ErrorCode::NumericalInstability, "alpha LP did not solve");
  AlphaResult out;
  out.value = res.objective;
  const double cp = std::pow(c, p);
  if (out.value >= cp - 1e-12) {
    out.feasible = true;
    out.alpha.assign(res.x.begin(), res.x.begin() + G);
    // pivoting leaves -1e-16 style residue on zero coordinates
    double s = 0.0;
    for (auto& t : out.alpha) s += t = std::max(t, 0.0);
    for (auto& t : out.alpha) t /= s;
    return out;
  }
  // Row duals of the coverage rows form the minimizing mixed strategy y.
  out.separator.resize(m);
  double s = 0.0;
  for (std::size_t n = 0; n < m; ++n) s += out.separator[n] = std::abs(res.duals[n]);
  for (auto& t : out.separator) t /= s;
  return out;
}

struct Projection {
  Mat P;       // dim x dim, P x = sum_n z_n(x) / z_n(x_n) x_n
  Mat z;       // z_n as vectors: z_n[(g,j)] = alpha_g * x_n[(g,j)]^{p-1}
};

inline Projection build_projection(const DisjointSystem& sys, std::span<const double> alpha) {
  const auto& sp = sys.space();
  if (alpha.size() != sp.blocks()) throw Error(ErrorCode::DimensionMismatch, "alpha length differs from block count");
  const std::size_t N = sp.dim(), k = sp.block_size();
  const double p = sp.p();
  Projection pr;
  pr.P.assign(N, Vec(N, 0.0));
  for (const auto& x : sys.vectors()) {
    // Norming functional of each block, weighted by alpha_g ||x(g)||^{p-1}.
    Vec z(N, 0.0);
    for (std::size_t g = 0; g < sp.blocks(); ++g)
      for (std::size_t j = 0; j < k; ++j) {
        double t = x[g * k + j];
        if (t > 0) z[g * k + j] = alpha[g] * std::pow(t, p - 1);
      }
    double zx = dot(z, x);
    if (!(zx > 0)) throw Error(ErrorCode::DegenerateFunctional, "z_n(x_n) = 0");
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) pr.P[i][j] += x[i] * z[j] / zx;
    pr.z.push_back(std::move(z));
  }
  return pr;
}

struct ProjectionReport {
  bool positive = false;
  bool idempotent = false;
  bool fixes_system = false;
  double norm_estimate = 0.0;
  double norm_bound = 0.0;   // c^{-p}
  bool norm_ok = false;
  bool ok() const { return positive && idempotent && fixes_system && norm_ok; }
};

inline ProjectionReport verify_projection(const Projection& pr, const DisjointSystem& sys, int samples = 1000,
                                          std::uint64_t seed = 0) {
  const auto& sp = sys.space();
  const std::size_t N = sp.dim();
  const Mat& P = pr.P;
  auto apply = [&](std::span<const double> x) {
    Vec y(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) y[i] = dot(P[i], x);
    return y;
  };
  ProjectionReport r;
  r.positive = true;
  for (const auto& row : P)
    for (double t : row) r.positive = r.positive && t >= 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < N; ++l) s += P[i][l] * P[l][j];
      worst = std::max(worst, std::abs(s - P[i][j]));
    }
  r.idempotent = worst <= 1e-9;
  r.fixes_system = true;
  for (const auto& x : sys.vectors()) {
    auto y = apply(x);
    for (std::size_t i = 0; i < N; ++i) r.fixes_system = r.fixes_system && std::abs(y[i] - x[i]) <= 1e-9;
  }
  // ||P|| from below: samples, unit vectors, then ascent on the best.
  auto ratio = [&](const Vec& x) {
    double nx = sp.norm(x);
    return nx > 0 ? sp.norm(apply(x)) / nx : 0.0;
  };
  Rng rng(derive_seed(seed, 0x9a));
  std::normal_distribution<double> nd;
  Vec best;
  double bv = -1;
  for (int s = 0; s < samples + static_cast<int>(N); ++s) {
    Vec x(N, 0.0);
    if (s < static_cast<int>(N)) x[s] = 1.0;
    else for (auto& t : x) t = std::abs(nd(rng));
    double v = ratio(x);
    if (v > bv) bv = v, best = x;
    if (s >= static_cast<int>(N)) {
      auto y = apply(x);
      for (double t : y) r.positive = r.positive && t >= -1e-12;
    }
  }
  AscentOptions ao;
  ao.max_evals = 20000;
  r.norm_estimate = perturbation_ascent(ratio, best, rng, ao).value;
  r.norm_bound = std::pow(sys.c(), -sp.p());
  r.norm_ok = r.norm_estimate <= r.norm_bound * (1 + 1e-6);
  return r;
}

// Non-empty I in {1..nMax} with |I| <= min I, in lexicographic order; bit i-1 = element i.
inline std::vector<std::uint32_t> schreier_sets(int nMax) {
  if (nMax < 1 || nMax > 24) throw Error(ErrorCode::InvalidArgument, "nMax must lie in [1, 24]");
  std::vector<std::uint32_t> out;
  // Depth-first over increasing sequences gives lexicographic order.
  auto rec = [&](auto&& self, std::uint32_t set, int minElem, int size, int next) -> void {
    for (int e = next; e <= nMax; ++e) {
      int mn = size == 0 ? e : minElem;
      if (size + 1 > mn) break;
      std::uint32_t s = set | (std::uint32_t{1} << (e - 1));
      out.push_back(s);
      self(self, s, mn, size + 1, e + 1);
    }
  };
  for (int first = 1; first <= nMax; ++first) {
    std::uint32_t s = std::uint32_t{1} << (first - 1);
    out.push_back(s);
    if (first > 1) rec(rec, s, first, 1, first + 1);
  }
  return out;
}

struct SchreierReport {
  double norm = 0.0;         // ||a|| in l^{p,inf}, norm of L^{p,inf}_1 type
  double max_restricted = 0.0;
  double ratio = 0.0;
  bool upper_ok = false;
  bool lower_ok = false;
  int level_set_size = 0;    // |L|
  double lower_constant = 0.0;
};

// a is rescaled so that ||a|| = 1 + 1e-9 before the lower check.
inline SchreierReport schreier_embedding_check(std::span<const double> a_in, const std::vector<std::uint32_t>& sets,
                                               double p) {
  PExponent pe(p);
  const std::size_t n = a_in.size();
  if (n > 24) throw Error(ErrorCode::DimensionTooLarge, "vectors limited to 24 coordinates");
  Vec a(a_in.begin(), a_in.end());
  for (auto& t : a) t = std::abs(t);
  SchreierReport r;
  r.lower_constant = 1.0 / (pe.conj() * std::pow(2.0, 1.0 / pe.conj()));
  const double na = detail::weak_r_sup(a, {}, p, 1.0);
  if (!(na > 0)) throw Error(ErrorCode::InvalidArgument, "a must be non-zero");
  const double scale = (1.0 + 1e-9) / na;
  for (auto& t : a) t *= scale;
  r.norm = detail::weak_r_sup(a, {}, p, 1.0);

  // Global decreasing order; restricting to a set keeps it sorted.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a[i] > a[j]; });
  const double e = 1.0 / p - 1.0;
  auto restricted = [&](std::uint32_t S) {
    double best = 0, s = 0;
    int k = 0;
    for (auto i : order) {
      if (i >= 32 || !(S >> i & 1)) continue;
      s += a[i];
      ++k;
      best = std::max(best, std::pow(double(k), e) * s);
    }
    return best;
  };
  for (auto S : sets) r.max_restricted = std::max(r.max_restricted, restricted(S));
  r.ratio = r.max_restricted / r.norm;
  r.upper_ok = r.max_restricted <= r.norm * (1 + 1e-12);

  // Level set L = top-k with a_k k^{1/p} >= 1/p'; the top half of L by index is Schreier.
  int L = 0;
  for (std::size_t k = 1; k <= n; ++k)
    if (a[order[k - 1]] * std::pow(double(k), 1.0 / p) >= 1.0 / pe.conj()) {
      L = static_cast<int>(k);
      break;
    }
  r.level_set_size = L;
  if (L == 0) return r;
  std::vector<std::size_t> Lidx(order.begin(), order.begin() + L);
  std::sort(Lidx.begin(), Lidx.end());
  std::uint32_t S = 0;
  const int half = (L + 1) / 2;
  for (int t = 0; t < half; ++t) S |= std::uint32_t{1} << Lidx[L - 1 - t];
  const int minElem = static_cast<int>(Lidx[L - half]) + 1;
  if (half > minElem) return r;  // not Schreier; cannot happen for distinct indices
  r.lower_ok = r.max_restricted >= r.lower_constant - 1e-9;
  return r;
}

// Test vectors for the Schreier check: uniform, sparse, power decays and
// truncations of (i^{-1/p}), the last shuffled half the time.
inline Vec random_schreier_vector(Rng& rng, std::size_t n, double p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<std::size_t> len(1, n);
  Vec a(n, 0.0);
  switch (kind(rng)) {
    case 0:
      for (auto& t : a) t = u(rng);
      break;
    case 1:
      for (auto& t : a) t = u(rng) < 0.3 ? u(rng) : 0.0;
      break;
    case 2: {
      double e = 0.2 + 2.0 * u(rng);
      for (std::size_t i = 0; i < n; ++i) a[i] = std::pow(double(i + 1), -e);
      break;
    }
    default: {
      std::size_t m = len(rng);
      for (std::size_t i = 0; i < m; ++i) a[i] = std::pow(double(i + 1), -1.0 / p);
      if (u(rng) < 0.5) std::shuffle(a.begin(), a.end(), rng);
    }
  }
  if (std::all_of(a.begin(), a.end(), [](double t) { return t == 0.0; })) a[0] = 1.0;
  return a;
}

}  // namespace fbllab
