#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fbllab/search.hpp"
#include "fbllab/seqnorm.hpp"

using namespace fbllab;

namespace {

// Independent oracles: direct evaluation of the defining suprema.

double oracle_weak_r(const std::vector<double>& h, const std::vector<double>& w, double p, double r) {
  const std::size_t n = h.size();
  double best = 0.0;
  for (unsigned A = 1; A < (1u << n); ++A) {
    double mass = 0, integral = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (A >> i & 1) mass += w[i], integral += std::pow(std::abs(h[i]), r) * w[i];
    best = std::max(best, std::pow(mass, 1 / p - 1 / r) * std::pow(integral, 1 / r));
  }
  return best;
}

// t -> v^- for each value v: v * mu(|h| >= v)^{1/p}.
double oracle_weak_quasi(const std::vector<double>& h, const std::vector<double>& w, double p) {
  double best = 0.0;
  for (double v : h) {
    v = std::abs(v);
    if (v == 0) continue;
    double mass = 0;
    for (std::size_t j = 0; j < h.size(); ++j)
      if (std::abs(h[j]) >= v) mass += w[j];
    best = std::max(best, v * std::pow(mass, 1 / p));
  }
  return best;
}

// Rearrangement inequality: the decreasing order maximizes sum |h_sigma(k)| w_k.
double oracle_lorentz(std::vector<double> h, double q) {
  const std::size_t n = h.size();
  std::vector<double> w(n);
  for (std::size_t k = 1; k <= n; ++k) w[k - 1] = std::pow(double(k), 1 / q) - std::pow(double(k - 1), 1 / q);
  for (auto& t : h) t = std::abs(t);
  std::sort(h.begin(), h.end());
  double best = 0;
  do {
    double s = 0;
    for (std::size_t k = 0; k < n; ++k) s += h[k] * w[k];
    best = std::max(best, s);
  } while (std::next_permutation(h.begin(), h.end()));
  return best;
}

std::vector<double> random_vec(Rng& rng, std::size_t n, bool with_zeros = true) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> z(0, 4);
  std::vector<double> v(n);
  for (auto& t : v) t = (with_zeros && z(rng) == 0) ? 0.0 : nd(rng);
  return v;
}

std::vector<double> random_weights(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.1, 3.0);
  std::vector<double> w(n);
  for (auto& t : w) t = u(rng);
  return w;
}

}  // namespace

TEST(AtomicSpace, RejectsBadWeights) {
  EXPECT_THROW(AtomicSpace(std::vector<double>{}), Error);
  EXPECT_THROW(AtomicSpace({1.0, 0.0}), Error);
  EXPECT_THROW(AtomicSpace({1.0, -2.0}), Error);
  EXPECT_THROW(AtomicSpace({1.0, INFINITY}), Error);
  EXPECT_THROW(WeightedFunction({1, 2}, AtomicSpace::counting(3)), Error);
  try {
    AtomicSpace({0.0});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidWeight);
  }
}

TEST(PExponent, Conjugate) {
  for (double p : {1.01, 1.5, 2.0, 3.0, 10.0}) {
    PExponent pe(p);
    EXPECT_NEAR(1 / p + 1 / pe.conj(), 1.0, 1e-12);
  }
  EXPECT_THROW(PExponent(1.0), Error);
  EXPECT_THROW(PExponent(0.5), Error);
  EXPECT_THROW(PExponent{INFINITY}, Error);
  EXPECT_THROW(PExponent{NAN}, Error);
}

TEST(Rearrangement, Examples) {
  auto r = decreasing_rearrangement(WeightedFunction({-3, 1, 2}, AtomicSpace::counting(3)));
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], std::make_pair(3.0, 1.0));
  EXPECT_EQ(r[1], std::make_pair(2.0, 1.0));
  EXPECT_EQ(r[2], std::make_pair(1.0, 1.0));

  auto z = decreasing_rearrangement(WeightedFunction({0, 0}, AtomicSpace({2, 5})));
  ASSERT_EQ(z.size(), 2u);
  EXPECT_EQ(z[0].first, 0.0);
  EXPECT_EQ(z[0].second + z[1].second, 7.0);

  auto t = decreasing_rearrangement(WeightedFunction({1, 1, 5}, AtomicSpace({0.5, 0.5, 1})));
  EXPECT_EQ(t[0], std::make_pair(5.0, 1.0));
  EXPECT_EQ(t[1], std::make_pair(1.0, 0.5));
  EXPECT_EQ(t[2], std::make_pair(1.0, 0.5));
}

TEST(LpNorm, Examples) {
  EXPECT_NEAR(lp_norm(WeightedFunction::counting({1, 1}), 2), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(lp_norm(WeightedFunction({2}, AtomicSpace({3})), 1), 6.0, 1e-15);
  EXPECT_NEAR(lp_norm(WeightedFunction::counting({3, 4}), 2), 5.0, 1e-15);
  EXPECT_THROW(lp_norm(WeightedFunction::counting({1}), 0.5), Error);
}

TEST(WeakQuasinorm, Examples) {
  for (double p : {1.5, 2.0, 7.0}) EXPECT_DOUBLE_EQ(weak_quasinorm(WeightedFunction::counting({1, 0, 0}), p), 1.0);
  EXPECT_DOUBLE_EQ(weak_quasinorm(WeightedFunction::counting({2, 1}), 2), 2.0);
  for (int n = 1; n <= 9; ++n)
    EXPECT_NEAR(weak_quasinorm(WeightedFunction::counting(std::vector<double>(n, 1.0)), 2), std::sqrt(double(n)), 1e-14);
}

TEST(WeakQuasinorm, MatchesThresholdGrid) {
  // sup_t t mu(|h| > t)^{1/p} over a fine grid approaches the value from below.
  Rng rng(11);
  for (int s = 0; s < 200; ++s) {
    auto h = random_vec(rng, 1 + s % 7);
    auto w = random_weights(rng, h.size());
    double exact = weak_quasinorm(WeightedFunction(h, AtomicSpace(w)), 2.5);
    EXPECT_NEAR(exact, oracle_weak_quasi(h, w, 2.5), 1e-12 * std::max(1.0, exact));
    double top = 0;
    for (double v : h) top = std::max(top, std::abs(v));
    double grid = 0;
    for (int k = 0; k <= 4000; ++k) {
      double t = top * k / 4000.0, mass = 0;
      for (std::size_t j = 0; j < h.size(); ++j)
        if (std::abs(h[j]) > t) mass += w[j];
      grid = std::max(grid, t * std::pow(mass, 1 / 2.5));
    }
    EXPECT_LE(grid, exact + 1e-12);
    EXPECT_GE(grid, exact * (1 - 2e-3));
  }
}

TEST(WeakL1, Examples) {
  EXPECT_NEAR(weak_L1_norm(WeightedFunction::counting({2, 1}), 2), 3 / std::sqrt(2.0), 1e-15);
  for (double p : {1.5, 2.0, 4.0}) EXPECT_DOUBLE_EQ(weak_L1_norm(WeightedFunction::counting({0, 1, 0}), p), 1.0);
  EXPECT_NEAR(weak_L1_norm(WeightedFunction::counting({1, 1, 1, 1}), 2), 2.0, 1e-15);
}

TEST(WeakLr, Examples) {
  EXPECT_NEAR(weak_Lr_norm(WeightedFunction::counting({1, 1}), 2, 1.5), std::sqrt(2.0), 1e-14);
  for (double p : {1.5, 2.0, 5.0})
    for (double r : {1.0, 1.2, 1.4})
      EXPECT_NEAR(weak_Lr_norm(WeightedFunction::counting({0, 0, 1}), p, r), 1.0, 1e-15);
  EXPECT_THROW(weak_Lr_norm(WeightedFunction::counting({1}), 2, 2), Error);
  EXPECT_THROW(weak_Lr_norm(WeightedFunction::counting({1}), 2, 0.5), Error);
  try {
    weak_Lr_norm(WeightedFunction::counting({1}), 2, 3);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidExponent);
  }
}

TEST(WeakLr, ROneIsWeakL1Exactly) {
  Rng rng(3);
  for (int s = 0; s < 500; ++s) {
    auto h = random_vec(rng, 1 + s % 10);
    std::vector<double> w = s % 2 ? random_weights(rng, h.size()) : std::vector<double>(h.size(), 1.0);
    WeightedFunction f(h, AtomicSpace(w));
    EXPECT_EQ(weak_Lr_norm(f, 2.7, 1.0), weak_L1_norm(f, 2.7));
  }
}

TEST(WeakLr, PrefixAgreesWithEnumerationExhaustive) {
  // All 0/1/2-valued vectors up to n = 8, plus random ones up to n = 12.
  for (std::size_t n = 1; n <= 8; ++n) {
    std::vector<int> digits(n, 0);
    while (true) {
      std::vector<double> h(digits.begin(), digits.end());
      std::vector<double> w(n, 1.0);
      for (double p : {1.5, 3.0})
        for (double r : {1.0, 1.3}) {
          double fast = weak_Lr_norm(WeightedFunction(h, AtomicSpace(w)), p, r);
          EXPECT_NEAR(fast, oracle_weak_r(h, w, p, r), 1e-12);
        }
      std::size_t k = 0;
      while (k < n && ++digits[k] == 3) digits[k++] = 0;
      if (k == n) break;
    }
  }
  Rng rng(5);
  for (int s = 0; s < 300; ++s) {
    auto h = random_vec(rng, 1 + s % 12);
    std::vector<double> w(h.size(), 1.0);
    double fast = weak_L1_norm(WeightedFunction(h, AtomicSpace(w)), 2.0);
    EXPECT_NEAR(fast, oracle_weak_r(h, w, 2.0, 1.0), 1e-12 * std::max(1.0, fast));
  }
}

TEST(WeakLr, NonUniformEnumerationAgreesWithOracle) {
  Rng rng(7);
  for (int s = 0; s < 300; ++s) {
    auto h = random_vec(rng, 1 + s % 11);
    auto w = random_weights(rng, h.size());
    for (double r : {1.0, 1.6}) {
      double fast = weak_Lr_norm(WeightedFunction(h, AtomicSpace(w)), 2.2, r);
      EXPECT_NEAR(fast, oracle_weak_r(h, w, 2.2, r), 1e-12 * std::max(1.0, fast));
    }
  }
}

TEST(WeakLr, TooManyNonUniformAtoms) {
  std::vector<double> h(23, 1.0), w(23, 1.0);
  w[0] = 2.0;
  try {
    weak_L1_norm(WeightedFunction(h, AtomicSpace(w)), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionTooLarge);
  }
  // Uniform weights take the prefix path at any size.
  std::vector<double> big(1000, 1.0);
  EXPECT_NEAR(weak_L1_norm(WeightedFunction::counting(big), 2), std::sqrt(1000.0), 1e-9);
  EXPECT_NO_THROW(weak_L1_norm(WeightedFunction(big, AtomicSpace(std::vector<double>(1000, 0.5))), 2));
}

TEST(Lorentz, Examples) {
  for (double q : {1.5, 2.0, 4.0}) EXPECT_DOUBLE_EQ(lorentz_q1_norm(WeightedFunction::counting({1, 0}), q), 1.0);
  EXPECT_NEAR(lorentz_q1_norm(WeightedFunction::counting({1, 1}), 2), std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(lorentz_q1_norm(WeightedFunction::counting({-3.5, 0, 0}), 3), 3.5);
  try {
    lorentz_q1_norm(WeightedFunction({1, 1}, AtomicSpace({1, 2})), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonCountingMeasure);
  }
}

TEST(Lorentz, RearrangementOracle) {
  Rng rng(13);
  for (int s = 0; s < 200; ++s) {
    auto h = random_vec(rng, 1 + s % 6);
    for (double q : {1.3, 2.0, 5.0})
      EXPECT_NEAR(lorentz_q1_norm(WeightedFunction::counting(h), q), oracle_lorentz(h, q), 1e-12);
  }
}

TEST(Sandwich, Examples) {
  auto s = sandwich_check(WeightedFunction::counting({2, 1}), 2, 1);
  EXPECT_DOUBLE_EQ(s.lhs, 2.0);
  EXPECT_NEAR(s.mid, 2.1213203436, 1e-10);
  EXPECT_DOUBLE_EQ(s.rhs, 4.0);
  EXPECT_TRUE(s.holds);
  auto z = sandwich_check(WeightedFunction::counting({0, 0, 0}), 3, 2);
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.mid, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
  EXPECT_TRUE(z.holds);
}

TEST(Sandwich, RandomVectors) {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int s = 0; s < 1000; ++s) {
    auto h = random_vec(rng, 1 + s % 10);
    auto w = s % 3 ? std::vector<double>(h.size(), 1.0) : random_weights(rng, h.size());
    double p = 1.1 + 5 * u(rng), r = 1 + (p - 1) * 0.99 * u(rng);
    auto rep = sandwich_check(WeightedFunction(h, AtomicSpace(w)), p, r);
    EXPECT_TRUE(rep.holds) << "p=" << p << " r=" << r;
    EXPECT_GE(rep.slack, -1e-9 * std::max(1.0, rep.rhs));
  }
}

TEST(Properties, ZeroFunctionIsExactlyZero) {
  WeightedFunction z({0, 0, 0}, AtomicSpace({1, 2, 3}));
  EXPECT_EQ(lp_norm(z, 2), 0.0);
  EXPECT_EQ(weak_quasinorm(z, 2), 0.0);
  EXPECT_EQ(weak_L1_norm(z, 2), 0.0);
  EXPECT_EQ(weak_Lr_norm(z, 2, 1.5), 0.0);
  EXPECT_EQ(lorentz_q1_norm(WeightedFunction::counting({0, 0}), 2), 0.0);
}

namespace {
std::vector<NormTag> all_tags() {
  return {NormTag::lp(1.0),       NormTag::lp(2.5),           NormTag::weak_quasi(2.0),
          NormTag::weak_l1(1.7),  NormTag::weak_lr(3.0, 2.0), NormTag::weak_lr(2.0, 1.0),
          NormTag::lorentz_q1(2.0)};
}
}  // namespace

TEST(Properties, Homogeneity) {
  Rng rng(19);
  std::normal_distribution<double> nd;
  for (int s = 0; s < 500; ++s) {
    auto h = random_vec(rng, 1 + s % 9);
    double lam = 3 * nd(rng);
    std::vector<double> lh(h);
    for (auto& t : lh) t *= lam;
    for (const auto& tag : all_tags()) {
      double a = tagged_norm(tag, lh), b = std::abs(lam) * tagged_norm(tag, h);
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, b)) << tag.str();
    }
  }
}

TEST(Properties, LatticeMonotone) {
  Rng rng(23);
  std::uniform_real_distribution<double> u(0, 1);
  for (int s = 0; s < 500; ++s) {
    auto h = random_vec(rng, 1 + s % 9);
    std::vector<double> g(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) g[i] = (u(rng) < 0.5 ? -1 : 1) * u(rng) * h[i];
    auto w = random_weights(rng, h.size());
    for (const auto& tag : all_tags()) {
      if (tag.kind == NormTag::Kind::LorentzQ1) {
        EXPECT_LE(tagged_norm(tag, g), tagged_norm(tag, h) + 1e-12) << tag.str();
      } else {
        EXPECT_LE(tagged_norm(tag, g, w), tagged_norm(tag, h, w) + 1e-12) << tag.str();
      }
    }
  }
}

TEST(Properties, PermutationInvariant) {
  Rng rng(29);
  for (int s = 0; s < 300; ++s) {
    auto h = random_vec(rng, 2 + s % 8);
    auto w = random_weights(rng, h.size());
    std::vector<std::size_t> perm(h.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> ph(h.size()), pw(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) ph[i] = h[perm[i]], pw[i] = w[perm[i]];
    for (const auto& tag : all_tags()) {
      if (tag.kind == NormTag::Kind::LorentzQ1) continue;
      EXPECT_NEAR(tagged_norm(tag, h, w), tagged_norm(tag, ph, pw), 1e-12 * std::max(1.0, tagged_norm(tag, h, w)));
    }
  }
}

TEST(Properties, UpperPEstimateOnDisjointVectors) {
  Rng rng(31);
  std::uniform_int_distribution<int> side(0, 2);
  for (int s = 0; s < 500; ++s) {
    std::size_t n = 2 + s % 10;
    auto v = random_vec(rng, n, false);
    auto w = s % 2 ? random_weights(rng, n) : std::vector<double>(n, 1.0);
    std::vector<double> g(n, 0.0), h(n, 0.0), sum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      int k = side(rng);
      if (k == 0) g[i] = v[i];
      if (k == 1) h[i] = v[i];
      sum[i] = g[i] + h[i];
    }
    for (double p : {1.5, 2.0, 4.0})
      for (double r : {1.0, 0.5 * (1 + p)}) {
        auto N = [&](const std::vector<double>& x) { return weak_Lr_norm(WeightedFunction(x, AtomicSpace(w)), p, r); };
        double bound = std::pow(std::pow(N(g), p) + std::pow(N(h), p), 1 / p);
        EXPECT_LE(N(sum), bound + 1e-12 * std::max(1.0, bound));
      }
  }
}

TEST(NormTag, ValidationAndNames) {
  EXPECT_THROW(NormTag::weak_lr(2, 2).validate(), Error);
  EXPECT_THROW(NormTag::lp(0.5).validate(), Error);
  EXPECT_THROW(NormTag::lorentz_q1(1.0).validate(), Error);
  EXPECT_FALSE(NormTag::weak_quasi(2).is_norm());
  EXPECT_TRUE(NormTag::weak_l1(2).is_norm());
  EXPECT_EQ(NormTag::weak_lr(2, 1.5).str(), "weak-lr:p=2,r=1.5");
}
