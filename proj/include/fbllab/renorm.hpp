#pragma once

// The gauge alpha(x) = (beta.x)^{1-s} (b.x)^s, its supergradient d at e, and
// the diagonal maps S_f : L^{p,inf}_r(mu) -> L^{p,inf}_1(nu) built from them.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fbllab/error.hpp"
#include "fbllab/search.hpp"
#include "fbllab/seqnorm.hpp"
#include "fbllab/space.hpp"

namespace fbllab {

struct AlphaGauge {
  Vec beta, b;
  double s;

  AlphaGauge(Vec beta_, Vec b_, double s_) : beta(std::move(beta_)), b(std::move(b_)), s(s_) {
    if (beta.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "beta and b differ in length");
    if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidExponent, "s must lie in (0, 1)");
    for (std::size_t i = 0; i < b.size(); ++i)
      if (beta[i] < 0 || b[i] < 0) throw Error(ErrorCode::NegativeInput, "gauge coefficients must be non-negative");
  }
  std::size_t size() const { return b.size(); }
};

inline double alpha(const AlphaGauge& g, std::span<const double> x) {
  if (x.size() != g.size()) throw Error(ErrorCode::DimensionMismatch, "x differs from gauge dimension");
  for (double t : x)
    if (t < 0) throw Error(ErrorCode::NegativeInput, "alpha is defined on the positive cone");
  double u = dot(g.beta, x), v = dot(g.b, x);
  if (u == 0.0 || v == 0.0) return 0.0;
  return std::pow(u, 1.0 - g.s) * std::pow(v, g.s);
}

// Gradient of alpha at e = (1, ..., 1); alpha(x) <= d.x on the cone by concavity.
inline Vec compute_d(const AlphaGauge& g) {
  const std::size_t n = g.size();
  double be = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) be += g.beta[i], bb += g.b[i];
  if (!(be > 0.0) || !(bb > 0.0)) throw Error(ErrorCode::DegenerateGauge, "beta.e and b.e must be positive");
  const double s = g.s;
  const double c1 = (1 - s) * std::pow(be, -s) * std::pow(bb, s);
  const double c2 = s * std::pow(be, 1 - s) * std::pow(bb, s - 1);
  Vec d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = c1 * g.beta[i] + c2 * g.b[i];
  return d;
}

struct RecursionReport {
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity();  // largest violation seen
  long checked = 0;
};

// The two-sided recursive conditions on d_i, checked over all integer tuples
// x, y, x', y' supported below i with entries in {0..maxEntry} and m, m' in {0..maxEntry}.
// z and z' are determined by the balance equations and must be non-negative.
inline RecursionReport check_recursion(const AlphaGauge& g, std::span<const double> d, int maxEntry = 2) {
  const std::size_t n = g.size();
  if (n > 6) throw Error(ErrorCode::DimensionTooLarge, "recursion check enumerates n <= 6");
  RecursionReport rep;
  const int base = maxEntry + 1;
  for (std::size_t i = 0; i < n; ++i) {
    long tuples = 1;
    for (std::size_t j = 0; j < i; ++j) tuples *= base;
    std::vector<int> x(i), y(i);
    Vec z(n);
    for (long tx = 0; tx < tuples; ++tx)
      for (long ty = 0; ty < tuples; ++ty)
        for (int m = 0; m <= maxEntry; ++m) {
          long ax = tx, ay = ty;
          for (std::size_t j = 0; j < i; ++j) x[j] = ax % base, ax /= base, y[j] = ay % base, ay /= base;
          double xd = 0, yd = 0;
          for (std::size_t j = 0; j < i; ++j) xd += x[j] * d[j], yd += y[j] * d[j];

          // x + z = e_i + m e + y
          bool pos = true;
          for (std::size_t j = 0; j < n; ++j) {
            z[j] = m + (j == i) + (j < i ? y[j] - x[j] : 0);
            pos = pos && z[j] >= 0;
          }
          if (pos) {
            double v = xd + alpha(g, z) - m - yd - d[i];
            rep.worst = std::max(rep.worst, v);
            rep.ok = rep.ok && v <= 1e-12;
            ++rep.checked;
          }
          // e_i + x' + z' = m' e + y'
          pos = true;
          for (std::size_t j = 0; j < n; ++j) {
            z[j] = m - (j == i) + (j < i ? y[j] - x[j] : 0);
            pos = pos && z[j] >= 0;
          }
          if (pos) {
            double v = d[i] - (m + yd - xd - alpha(g, z));
            rep.worst = std::max(rep.worst, v);
            rep.ok = rep.ok && v <= 1e-12;
            ++rep.checked;
          }
        }
  }
  return rep;
}

// f = sum a_i chi_{A_i} with mu(A_i) = mu_i, a_i > 0.
struct SimpleFunction {
  Vec a, mu;
};

struct RenormEmbedding {
  double M = 0.0;
  double C = 0.0;
  double s = 0.0;
  AlphaGauge gauge{{1.0}, {1.0}, 0.5};
  Vec d;            // target atom masses nu_i
  Vec multipliers;  // (S g)_i = multipliers_i * g_i
  double p = 2.0, r = 1.5;

  Vec apply(std::span<const double> g) const {
    Vec out(multipliers.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = multipliers[i] * g[i];
    return out;
  }
  double image_norm(std::span<const double> g) const { return detail::weak_r_sup(apply(g), d, p, 1.0); }

  // Upper bound on ||S|| from Holder on each atom set A:
  // M^{r/p-1} (sum_A a^{(r-1)r'} mu)^{1/r'} mu(A)^{1/r-1/p} / nu(A)^{1/p'}.
  double holder_bound(const Vec& a, const Vec& mu) const {
    const std::size_t n = a.size();
    const double rc = r / (r - 1), pc = p / (p - 1);
    double worst = 0.0;
    for (std::uint32_t A = 1; A < (std::uint32_t{1} << n); ++A) {
      double sa = 0, ma = 0, na = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (A >> i & 1) sa += std::pow(a[i], (r - 1) * rc) * mu[i], ma += mu[i], na += d[i];
      if (na <= 0) continue;
      double k = std::pow(M, r / p - 1) * std::pow(sa, 1 / rc) * std::pow(ma, 1 / r - 1 / p) / std::pow(na, 1 / pc);
      worst = std::max(worst, k);
    }
    return worst;
  }
};

inline RenormEmbedding build_renorm_embedding(const SimpleFunction& f, double p, double r) {
  PExponent pe(p);
  if (!(r > 1.0 && r < p)) throw Error(ErrorCode::InvalidExponent, "r must lie in (1, p)");
  const std::size_t n = f.a.size();
  if (n == 0 || f.mu.size() != n) throw Error(ErrorCode::DimensionMismatch, "a and mu must have equal, non-zero length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(f.a[i] > 0)) throw Error(ErrorCode::NegativeInput, "simple function values must be positive");
    if (!(f.mu[i] > 0) || !std::isfinite(f.mu[i])) throw Error(ErrorCode::InvalidWeight, "atom masses must be positive");
  }
  RenormEmbedding E;
  E.p = p;
  E.r = r;
  for (double m : f.mu) E.M += m;
  double lr = 0.0;
  for (std::size_t i = 0; i < n; ++i) lr += std::pow(f.a[i], r) * f.mu[i];
  E.C = std::pow(E.M, -1 / r + 1 / p) * std::pow(lr, 1 / r);
  if (E.C > 1.0 + 1e-12) throw Error(ErrorCode::ScaleViolation, "C = " + std::to_string(E.C) + " exceeds 1");
  E.s = pe.conj() * (1 / r - 1 / p);
  Vec beta(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = f.mu[i] / E.M;
    beta[i] = std::pow(E.M, r / p - 1) * f.mu[i] * std::pow(f.a[i], r);
  }
  E.gauge = AlphaGauge(beta, b, E.s);
  E.d = compute_d(E.gauge);
  E.multipliers.resize(n);
  for (std::size_t i = 0; i < n; ++i) E.multipliers[i] = std::pow(E.M, r / p) * std::pow(f.a[i], r - 1) * b[i] / E.d[i];
  return E;
}

struct RenormReport {
  double C = 0.0;
  double image_of_f = 0.0;   // ||S f||_{L^{p,inf}_1(nu)}
  double lower_target = 0.0; // C^r
  double holder_bound = 0.0; // certified upper bound on ||S||
  double sampled_max = 0.0;  // max ||S g|| over sampled g in the unit ball
  bool lower_ok = false;
  bool upper_ok = false;
};

inline RenormReport verify_renorm(const SimpleFunction& f, const RenormEmbedding& E, int samples = 1000,
                                  std::uint64_t seed = 0) {
  RenormReport rep;
  rep.C = E.C;
  rep.image_of_f = E.image_norm(f.a);
  rep.lower_target = std::pow(E.C, E.r);
  rep.lower_ok = rep.image_of_f >= rep.lower_target - 1e-9;
  rep.holder_bound = E.holder_bound(f.a, f.mu);
  Rng rng(derive_seed(seed, 0x4e));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = f.a.size();
  PExponent pe(E.p);
  for (int k = 0; k < samples; ++k) {
    Vec g(n);
    for (auto& t : g) t = u(rng) < 0.2 ? 0.0 : u(rng);
    if (k < static_cast<int>(n)) std::fill(g.begin(), g.end(), 0.0), g[k] = 1.0;
    if (k == static_cast<int>(n)) g = f.a;
    double ng = detail::weak_r_sup(g, f.mu, E.p, E.r);
    if (!(ng > 0)) continue;
    for (auto& t : g) t /= ng;
    rep.sampled_max = std::max(rep.sampled_max, E.image_norm(g));
  }
  rep.upper_ok = rep.holder_bound <= 1.0 + 1e-9 && rep.sampled_max <= 1.0 + 1e-9;
  return rep;
}

struct IsometricReport {
  double norm = 0.0;   // ||g||_{L^{p,inf}_r(mu)}
  double lower = 0.0;  // ||S_f g|| for the maximizing sub-function f
  double upper = 0.0;  // max over the constructed family
  int family = 0;
  bool ok = false;
};

// Builds S_f for f = g chi_I / ||g|| over all supports I, plus seeded random
// simple functions scaled to C = 1, and compares ||S_f g|| with ||g||.
inline IsometricReport isometric_family_test(std::span<const double> g_in, std::span<const double> mu, double p, double r,
                                             double epsilon = 0.01, int random_family = 32, std::uint64_t seed = 0) {
  const std::size_t n = g_in.size();
  if (mu.size() != n) throw Error(ErrorCode::DimensionMismatch, "g and mu differ in length");
  if (n > 12) throw Error(ErrorCode::DimensionTooLarge, "isometric family enumerates n <= 12");
  Vec g(g_in.begin(), g_in.end());
  for (auto& t : g) t = std::abs(t);
  Vec m(mu.begin(), mu.end());
  IsometricReport rep;
  rep.norm = detail::weak_r_sup(g, m, p, r);
  if (rep.norm == 0.0) {
    rep.ok = true;
    return rep;
  }
  // ||S_f g|| where S_f only sees the atoms idx carried by f.
  auto image = [&](const Vec& a, const std::vector<std::size_t>& idx) {
    Vec ms, gs;
    for (auto i : idx) ms.push_back(m[i]), gs.push_back(g[i]);
    auto E = build_renorm_embedding({a, ms}, p, r);
    ++rep.family;
    return E.image_norm(gs);
  };
  auto scale_of = [&](const Vec& a, const std::vector<std::size_t>& idx) {
    double mass = 0, lr = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) mass += m[idx[k]], lr += std::pow(a[k], r) * m[idx[k]];
    return std::pow(mass, -1 / r + 1 / p) * std::pow(lr, 1 / r);
  };

  double best_scale = -1;
  for (std::uint32_t I = 1; I < (std::uint32_t{1} << n); ++I) {
    Vec a;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if ((I >> i & 1) && g[i] > 0) a.push_back(g[i] / rep.norm), idx.push_back(i);
    if (idx.size() != static_cast<std::size_t>(std::popcount(I))) continue;
    double v = image(a, idx);
    rep.upper = std::max(rep.upper, v);
    double c = scale_of(a, idx);
    if (c > best_scale) best_scale = c, rep.lower = v;
  }
  Rng rng(derive_seed(seed, 0x150));
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (int k = 0; k < random_family; ++k) {
    Vec a(n);
    for (auto& t : a) t = u(rng);
    double c = scale_of(a, all);
    for (auto& t : a) t /= c;
    rep.upper = std::max(rep.upper, image(a, all));
  }
  rep.ok = rep.upper <= rep.norm + 1e-9 && rep.lower >= std::pow(1 - epsilon, r) * rep.norm - 1e-9;
  return rep;
}

}  // namespace fbllab
