#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fbllab/embed.hpp"

using namespace fbllab;
using L = UnconditionalLattice;

namespace {

double x3_bound(double p) {
  const double q = p / (p - 1), t = std::pow(2.0, q);
  return std::pow(3 * t / (2 * (1 + t)), 1 / q);
}

const std::vector<Mask> kPairs{0b011, 0b110, 0b101};

// Every subset constraint of the certificate LP, checked directly.
double worst_subset_slack(const L& X, const Vec& b, const Vec& d, double C) {
  const double q = X.pconj(), nb = X.dual_norm(b);
  double worst = INFINITY;
  for (Mask I = 1; I < (Mask{1} << X.dim()); ++I) {
    Vec bi(b.size(), 0.0);
    double dI = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (I >> i & 1) bi[i] = b[i] / nb, dI += d[i];
    worst = std::min(worst, std::pow(C, q) * dI - std::pow(X.dual_norm(bi), q));
  }
  return worst;
}

Vec normalized(const L& X, Vec a) {
  double n = X.norm(a);
  for (auto& t : a) t /= n;
  return a;
}

}  // namespace

TEST(Cover, X3ClosedForm) {
  for (double p : {1.5, 2.0, 3.0, 10.0}) {
    auto X = L::x3(p);
    double v = cover_obstruction(X, Vec{1, 1, 1}, kPairs);
    EXPECT_NEAR(v, x3_bound(p), 1e-9) << p;
    EXPECT_GT(v, 1.0);
  }
  EXPECT_NEAR(cover_obstruction(L::x3(2), Vec{1, 1, 1}, kPairs), std::sqrt(1.2), 1e-12);
}

TEST(Cover, LpHasNoObstruction) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (double p : {1.5, 3.0}) {
    auto X = L::lp(p, 4);
    for (int s = 0; s < 20; ++s) {
      Vec b{u(rng), u(rng), u(rng), u(rng)};
      EXPECT_NEAR(cover_obstruction(X, b, {1, 2, 4, 8}), 1.0, 1e-12);
      // any constant-multiplicity cover stays <= 1 for l^p
      EXPECT_LE(cover_obstruction(X, b, {0b0011, 0b1100, 0b0110, 0b1001}), 1.0 + 1e-12);
    }
  }
}

TEST(Cover, Errors) {
  auto X = L::x3(2);
  for (auto cover : std::vector<std::vector<Mask>>{{}, {0b011, 0b100, 0b001}, {0}, {0b1000}}) {
    try {
      cover_obstruction(X, Vec{1, 1, 1}, cover);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::CoverInvalid);
    }
  }
  EXPECT_THROW(parse_cover({{0, 3}}, 3), Error);
  EXPECT_EQ(parse_cover({{0, 1}, {1, 2}, {0, 2}}, 3), kPairs);
}

TEST(Cover, X3DualLowerEstimate) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (double p : {1.5, 2.0, 4.0}) {
    auto X = L::x3(p);
    const double q = X.pconj();
    for (int s = 0; s < 200; ++s) {
      Vec b{u(rng), u(rng), u(rng)};
      for (Mask I = 1; I < 7; ++I) {
        double lhs = std::pow(X.dual_norm(restrict_to(b, I)), q) + std::pow(X.dual_norm(restrict_to(b, 7 & ~I)), q);
        EXPECT_LE(lhs, std::pow(X.dual_norm(b), q) + 1e-12);
      }
    }
  }
}

TEST(Obstruction, RediscoversX3Pairs) {
  for (double p : {1.5, 2.0, 3.0, 10.0}) {
    ObstructionOptions o;
    o.samples = 16;
    auto r = obstruction_search(L::x3(p), o);
    EXPECT_GE(r.value, x3_bound(p) - 1e-6) << p;
    EXPECT_TRUE(r.exhaustive);
    EXPECT_NEAR(cover_obstruction(L::x3(p), r.b, r.cover), r.value, 1e-12);
  }
}

TEST(Obstruction, IsometricCasesGiveOne) {
  ObstructionOptions o;
  o.samples = 16;
  EXPECT_NEAR(obstruction_search(L::lp(2, 3), o).value, 1.0, 1e-6);
  EXPECT_NEAR(obstruction_search(L::lp(3, 3), o).value, 1.0, 1e-6);
  EXPECT_NEAR(obstruction_search(L::weak_lp(2, 2), o).value, 1.0, 1e-6);
  EXPECT_THROW(obstruction_search(L::lp(2, 9)), Error);
}

TEST(Lp, X3InfeasibleAtOneFeasibleAboveBound) {
  for (double p : {1.5, 2.0, 3.0, 10.0}) {
    auto X = L::x3(p);
    Vec b{1, 1, 1};
    auto r1 = lp_feasibility_d(X, b, 1.0);
    EXPECT_FALSE(r1.feasible) << p;
    EXPECT_GT(r1.cover_gap, 0.0);
    double C = x3_bound(p) + 0.05;
    auto r2 = lp_feasibility_d(X, b, C);
    ASSERT_TRUE(r2.feasible) << p;
    EXPECT_GE(worst_subset_slack(X, b, r2.d, C), -1e-9);
    double mc = minimal_feasible_C(X, b);
    EXPECT_GE(mc, x3_bound(p) - 1e-6);
    EXPECT_LE(mc, C);
    EXPECT_FALSE(lp_feasibility_d(X, b, mc - 2e-4).feasible);
  }
  // p = 2: sum over the three pairs of d is 2 but each must be at least 4/5.
  auto r = lp_feasibility_d(L::x3(2), Vec{1, 1, 1}, 1.0);
  EXPECT_NEAR(r.margin, -(4.0 / 5 - 2.0 / 3), 1e-9);
  EXPECT_TRUE(lp_feasibility_d(L::x3(2), Vec{1, 1, 1}, 1.2).feasible);
}

TEST(Lp, TrivialAndMonotone) {
  auto r = lp_feasibility_d(L::lp(2, 3), Vec{1, 0, 0}, 1.0);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.d[0], 1.0, 1e-12);
  Rng rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<L> all{L::x3(2), L::weak_lp(2, 4), L::weak_lp(3, 3), L::lp(1.5, 4)};
  for (const auto& X : all)
    for (int s = 0; s < 10; ++s) {
      Vec b(X.dim());
      for (auto& t : b) t = u(rng);
      bool prev = false;
      for (double C = 0.9; C < 2.0; C += 0.05) {
        auto f = lp_feasibility_d(X, b, C);
        if (prev) {
          EXPECT_TRUE(f.feasible) << X.id() << " C=" << C;
        }
        if (f.feasible) {
          EXPECT_GE(worst_subset_slack(X, b, f.d, C), -1e-9);
        }
        prev = f.feasible;
      }
    }
  EXPECT_THROW(lp_feasibility_d(L::lp(2, 16), Vec(16, 1.0), 1.0), Error);
}

TEST(Lp, ObstructionBelowMinimalC) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<L> all{L::x3(1.5), L::x3(3), L::weak_lp(2, 3), L::weak_lp(1.5, 4)};
  for (const auto& X : all)
    for (int s = 0; s < 5; ++s) {
      Vec b(X.dim());
      for (auto& t : b) t = u(rng);
      double mc = minimal_feasible_C(X, b);
      // every constant-multiplicity cover is a lower bound
      const std::size_t n = X.dim();
      std::vector<Mask> pairs;
      for (std::size_t i = 0; i < n; ++i) pairs.push_back((Mask{1} << i) | (Mask{1} << ((i + 1) % n)));
      EXPECT_LE(cover_obstruction(X, b, pairs), mc + 1e-6) << X.id();
    }
}

TEST(Certificate, Verify) {
  auto X = L::lp(2, 2);
  EmbeddingCertificate c{{1, 0}, {1, 0}, {1, 0}, 1.0, 0.01};
  auto r = certificate_verify(X, c);
  EXPECT_TRUE(r.valid) << r.violation;
  c.d = {0.6, 0.6};
  EXPECT_EQ(certificate_verify(X, c).violation, "SimplexViolation");
  c.d = {1, 0};
  c.b = {0.5, 0};
  EXPECT_EQ(certificate_verify(X, c).violation, "PairingViolation");
  c.b = {-1, 0};
  EXPECT_EQ(certificate_verify(X, c).violation, "PositivityViolation");

  auto X3 = L::x3(2);
  Vec b{1 / std::sqrt(5.0), 1 / std::sqrt(5.0), 1 / std::sqrt(5.0)};
  Vec a = normalized(X3, {1, 1, 1});
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; i + j <= 20; ++j) {
      EmbeddingCertificate e{a, b, {i / 20.0, j / 20.0, (20 - i - j) / 20.0}, 1.0, 0.01};
      auto v = certificate_verify(X3, e);
      EXPECT_FALSE(v.valid);
      EXPECT_EQ(v.violation, "SubsetViolation");
    }
  EXPECT_THROW(certificate_verify(L::lp(2, 21), {Vec(21), Vec(21), Vec(21), 1, 0.01}), Error);
}

TEST(Certificate, SearchExamples) {
  auto r = certificate_search(L::lp(2, 3), Vec{0, 1, 0}, 0.01, 1.0);
  ASSERT_TRUE(r.found);
  EXPECT_NEAR(r.certificate.b[1], 1.0, 1e-12);
  EXPECT_NEAR(r.certificate.d[1], 1.0, 1e-12);

  auto X = L::x3(2);
  Vec a = normalized(X, {1, 1, 1});
  EXPECT_FALSE(certificate_search(X, a, 0.01, 1.0).found);
  auto ok = certificate_search(X, a, 0.01, 1.1);
  ASSERT_TRUE(ok.found);
  EXPECT_TRUE(certificate_verify(X, ok.certificate).valid);
}

TEST(Certificate, OperatorS) {
  auto X2 = L::lp(2, 2);
  EmbeddingCertificate c{{1, 0}, {1, 0}, {1, 0}, 1.0, 0.01};
  auto S = build_S(X2, c);
  EXPECT_EQ(S.atoms.size(), 1u);
  EXPECT_NEAR(S.norm_of_image(Vec{1, 0}), 1.0, 1e-12);
  c.d = {0, 1};
  EXPECT_THROW(build_S(X2, c), Error);

  auto X = L::x3(2);
  auto found = certificate_search(X, normalized(X, {1, 1, 1}), 0.01, 1.1);
  ASSERT_TRUE(found.found);
  auto T = build_S(X, found.certificate);
  auto rep = verify_S(X, found.certificate, T, 1000, 7);
  EXPECT_TRUE(rep.lower_ok);
  EXPECT_TRUE(rep.upper_ok);
  EXPECT_LE(rep.max_ratio, 1.1 + 1e-9);
  // full-measure test set: integral of |S a| over all atoms is sum a_i b_i
  double full = 0;
  auto img = T.apply(found.certificate.a);
  for (std::size_t k = 0; k < img.size(); ++k) full += std::abs(img[k]) * T.measure.weight(k);
  EXPECT_NEAR(full, rep.full_set_value, 1e-9);
  EXPECT_GE(rep.image_of_a, full - 1e-12);
}

TEST(Certificate, PlaneLatticesEmbedWithConstantOne) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int s = 0; s < 20; ++s) {
    auto X = L::random_plane(rng, 2, 1 + s % 5);
    Vec a{u(rng), u(rng)};
    auto r = certificate_search(X, a, 0.01, 1 + 1e-4);
    EXPECT_TRUE(r.found) << s;
  }
}

TEST(Probe, LpIsIsometric) {
  ProbeOptions o;
  o.samples = 4;
  auto r = extension_norm_probe(L::lp(2, 2), o);
  EXPECT_LE(r.max_ratio, 1 + 1e-3);
  auto g = extension_norm_probe(L::weak_lp(2, 3), {parse("d1"), parse("d2")}, o);
  for (double t : g.ratios) EXPECT_NEAR(t, 1.0, 1e-6);
  EXPECT_TRUE(g.heuristic);
}
