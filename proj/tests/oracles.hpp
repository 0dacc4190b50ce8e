#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

// Gaussian elimination with partial pivoting; nullopt if singular.
inline std::optional<Vec> solve_square(Mat A, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-12) return std::nullopt;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= A[i][i];
  return b;
}

// max over alpha in the simplex of min_n (S^T alpha)_n, S is G x m, by
// enumerating vertices of {(alpha, t) : alpha >= 0, sum alpha = 1, (S^T alpha)_n >= t}.
inline double game_value(const Mat& S) {
  const std::size_t G = S.size(), m = S.front().size(), total = m + G;
  double best = -INFINITY;
  // choose G of the m + G inequalities to be tight, plus the equality
  for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != G) continue;
    Mat A;
    Vec b;
    for (std::size_t i = 0; i < total; ++i) {
      if (!(mask >> i & 1)) continue;
      Vec row(G + 1, 0.0);
      if (i < m) {
        for (std::size_t g = 0; g < G; ++g) row[g] = S[g][i];
        row[G] = -1;
      } else {
        row[i - m] = 1;
      }
      A.push_back(row), b.push_back(0);
    }
    Vec eq(G + 1, 1.0);
    eq[G] = 0;
    A.push_back(eq), b.push_back(1);
    auto x = solve_square(A, b);
    if (!x) continue;
    bool ok = true;
    for (std::size_t g = 0; g < G; ++g) ok = ok && (*x)[g] >= -1e-12;
    for (std::size_t n = 0; n < m && ok; ++n) {
      double s = 0;
      for (std::size_t g = 0; g < G; ++g) s += S[g][n] * (*x)[g];
      ok = s >= (*x)[G] - 1e-12;
    }
    if (ok) best = std::max(best, (*x)[G]);
  }
  return best;
}

// sup_A |A|^{1/p - 1} sum_A |a| over subsets of a counting-measure vector.
// Zero entries never help, so only the support is enumerated.
inline double weak_l1_enum(const Vec& a, double p) {
  Vec v;
  for (double t : a)
    if (t != 0) v.push_back(std::abs(t));
  double best = 0;
  for (std::uint32_t A = 1; A < (1u << v.size()); ++A) {
    double s = 0;
    int k = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (A >> i & 1) s += v[i], ++k;
    best = std::max(best, std::pow(double(k), 1 / p - 1) * s);
  }
  return best;
}

// Non-empty subsets of {1..n} with |I| <= min I, as bitmasks, by filtering all subsets.
inline std::vector<std::uint32_t> schreier_filter(int n) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t I = 1; I < (1u << n); ++I)
    if (__builtin_popcount(I) <= __builtin_ctz(I) + 1) out.push_back(I);
  return out;
}

// Disjoint non-negative vectors in (l^p(k))^G_inf, each of sup-block norm 1.
inline Mat random_disjoint_vectors(std::mt19937_64& rng, std::size_t G, std::size_t k, std::size_t m, double p) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_int_distribution<int> owner(-1, static_cast<int>(m) - 1);
  const std::size_t N = G * k;
  Mat xs(m, Vec(N, 0.0));
  std::vector<std::size_t> coords(N);
  for (std::size_t j = 0; j < N; ++j) coords[j] = j;
  std::shuffle(coords.begin(), coords.end(), rng);
  for (std::size_t j = 0; j < N; ++j) {
    int o = j < m ? static_cast<int>(j) : owner(rng);
    if (o >= 0) xs[o][coords[j]] = u(rng);
  }
  for (auto& x : xs) {
    double mx = 0;
    for (std::size_t g = 0; g < G; ++g) {
      double s = 0;
      for (std::size_t j = 0; j < k; ++j) s += std::pow(x[g * k + j], p);
      mx = std::max(mx, std::pow(s, 1 / p));
    }
    for (auto& t : x) t /= mx;
  }
  return xs;
}

// c^p = min over b in the simplex of max_g sum_n b_n ||x_n(g)||^p, the game value of S^T.
inline double exact_c(const Mat& S, double p) {
  Mat St(S.front().size(), Vec(S.size()));
  for (std::size_t g = 0; g < S.size(); ++g)
    for (std::size_t n = 0; n < S[g].size(); ++n) St[n][g] = S[g][n];
  // min_b max_g (S b)_g = -max_b min_g (-S b)_g
  Mat neg = St;
  for (auto& r : neg)
    for (auto& t : r) t = -t;
  return std::pow(-game_value(neg), 1 / p);
}

}  // namespace oracle
