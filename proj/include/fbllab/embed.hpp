#pragma once

// Certificates (a, b, d, C) for the embedding of a finite lattice X into
// (sum weak-L^p)_inf, the LP that finds d, the diagonal operator S, and
// cover obstructions that bound C from below.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fbllab/error.hpp"
#include "fbllab/fblnorm.hpp"
#include "fbllab/lattice.hpp"
#include "fbllab/latexpr.hpp"
#include "fbllab/search.hpp"
#include "fbllab/seqnorm.hpp"
#include "fbllab/simplex.hpp"

namespace fbllab {

inline constexpr std::size_t kMaxVerifyDim = 20;
inline constexpr std::size_t kMaxLpDim = 15;
inline constexpr std::size_t kMaxCoverDim = 8;

using Mask = std::uint32_t;

inline Vec restrict_to(std::span<const double> b, Mask I) {
  Vec v(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i)
    if (I >> i & 1) v[i] = b[i];
  return v;
}

inline std::vector<int> mask_indices(Mask I) {
  std::vector<int> out;
  for (int i = 0; i < 32; ++i)
    if (I >> i & 1) out.push_back(i);
  return out;
}

// phi(I) = N*(b chi_I)^{p'} for every non-empty I; index = mask.
inline Vec subset_dual_powers(const UnconditionalLattice& X, std::span<const double> b) {
  const std::size_t n = X.dim();
  Vec phi(std::size_t{1} << n, 0.0);
  for (Mask I = 1; I < phi.size(); ++I) phi[I] = std::pow(X.dual_norm(restrict_to(b, I)), X.pconj());
  return phi;
}

struct EmbeddingCertificate {
  Vec a, b, d;
  double C = 1.0;
  double epsilon = 0.01;
};

struct VerifyReport {
  bool valid = false;
  std::string violation;  // empty when valid
  Mask worst_subset = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double pairing = 0.0;
};

inline VerifyReport certificate_verify(const UnconditionalLattice& X, const EmbeddingCertificate& c) {
  const std::size_t n = X.dim();
  if (n > kMaxVerifyDim) throw Error(ErrorCode::DimensionTooLarge, "certificate verification limited to n <= 20");
  if (c.a.size() != n || c.b.size() != n || c.d.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "certificate vectors differ from lattice dimension");
  VerifyReport r;
  auto fail = [&](const char* what) {
    r.valid = false;
    r.violation = what;
    return r;
  };
  for (std::size_t i = 0; i < n; ++i)
    if (c.a[i] < 0 || c.b[i] < 0) return fail("PositivityViolation");
  double sum = 0.0;
  for (double x : c.d) {
    if (x < -1e-12) return fail("SimplexViolation");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) return fail("SimplexViolation");
  if (X.dual_norm(c.b) > 1.0 + 1e-9) return fail("DualNormViolation");
  const double na = X.norm(c.a);
  if (std::abs(na - 1.0) > (X.exact_primal() ? 1e-9 : 1e-7)) return fail("NormalizationViolation");
  r.pairing = dot(c.a, c.b);
  if (!(r.pairing > 1.0 - c.epsilon)) return fail("PairingViolation");

  const double q = X.pconj(), Cq = std::pow(c.C, q);
  for (Mask I = 1; I < (Mask{1} << n); ++I) {
    double lhs = std::pow(X.dual_norm(restrict_to(c.b, I)), q), dI = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (I >> i & 1) dI += c.d[i];
    double excess = lhs - Cq * dI;
    if (excess > r.worst_excess) r.worst_excess = excess, r.worst_subset = I;
  }
  if (r.worst_excess > 1e-9) return fail("SubsetViolation");
  r.valid = true;
  return r;
}

struct CoverWeight {
  Mask set;
  double weight;
};

struct LpFeasibility {
  bool feasible = false;
  Vec d;                            // when feasible
  double margin = 0.0;              // max over d of min_I (sum_I d - g(I))
  std::vector<CoverWeight> cover;   // aggregated violated constraint when infeasible
  double cover_gap = 0.0;           // sum g(I) y_I - max_i coverage_i(y)
  long pivots = 0;
};

// Find d in the simplex with sum_{i in I} d_i >= N*(b chi_I)^{p'} / C^{p'} for all I,
// b first scaled to N*(b) = 1.
// Solved through the dual, which has n + 1 rows: minimize w - sum g(I) y_I over
// distributions y on subsets with w >= coverage of each atom. Its row duals are d.
inline LpFeasibility lp_feasibility_d(const UnconditionalLattice& X, std::span<const double> b, double C,
                                      double tol = 1e-12) {
  const std::size_t n = X.dim();
  if (n > kMaxLpDim) throw Error(ErrorCode::DimensionTooLarge, "LP feasibility limited to n <= 15");
  if (b.size() != n) throw Error(ErrorCode::DimensionMismatch, "b differs from lattice dimension");
  if (!(C > 0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");
  const std::size_t S = (std::size_t{1} << n) - 1;
  Vec bn(b.begin(), b.end());
  const double bnorm = X.dual_norm(bn);
  if (!(bnorm > 0)) throw Error(ErrorCode::InvalidArgument, "b must be non-zero");
  for (auto& t : bn) t = std::abs(t) / bnorm;
  auto phi = subset_dual_powers(X, bn);
  const double Cq = std::pow(C, X.pconj());
  Vec g(S + 1, 0.0);
  for (Mask I = 1; I <= S; ++I) g[I] = phi[I] / Cq;

  // Variables: y_1..y_S (column I-1), then w.
  Vec cost(S + 1, 0.0);
  for (Mask I = 1; I <= S; ++I) cost[I - 1] = g[I];
  cost[S] = -1.0;
  std::vector<LpRow> rows;
  LpRow simplex{Vec(S + 1, 0.0), Relation::Equal, 1.0};
  for (std::size_t j = 0; j < S; ++j) simplex.a[j] = 1.0;
  rows.push_back(simplex);
  for (std::size_t i = 0; i < n; ++i) {
    LpRow r{Vec(S + 1, 0.0), Relation::GreaterEq, 0.0};
    for (Mask I = 1; I <= S; ++I)
      if (I >> i & 1) r.a[I - 1] = -1.0;
    r.a[S] = 1.0;
    rows.push_back(std::move(r));
  }
  auto res = solve_lp(cost, rows);
  if (res.status != LpResult::Status::Optimal) throw Error(ErrorCode::NumericalInstability, "certificate LP did not solve");

  LpFeasibility out;
  out.pivots = res.pivots;
  out.margin = -res.objective;

  Vec d(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += d[i] = std::max(0.0, -res.duals[i + 1]);
  if (sum > 0)
    for (auto& t : d) t /= sum;
  // Independent re-check over every subset.
  double worst = std::numeric_limits<double>::infinity();
  for (Mask I = 1; I <= S; ++I) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (I >> i & 1) s += d[i];
    worst = std::min(worst, s - g[I]);
  }

  if (out.margin >= -tol) {
    if (worst < -1e-9) throw Error(ErrorCode::NumericalInstability, "recovered d fails the subset constraints");
    out.feasible = true;
    out.d = d;
    return out;
  }
  Vec cov(n, 0.0);
  double gy = 0.0;
  for (Mask I = 1; I <= S; ++I) {
    double y = res.x[I - 1];
    if (y <= 1e-15) continue;
    out.cover.push_back({I, y});
    gy += g[I] * y;
    for (std::size_t i = 0; i < n; ++i)
      if (I >> i & 1) cov[i] += y;
  }
  out.cover_gap = gy - *std::max_element(cov.begin(), cov.end());
  return out;
}

// Smallest C (to tol) at which lp_feasibility_d succeeds for this b.
inline double minimal_feasible_C(const UnconditionalLattice& X, std::span<const double> b, double tol = 1e-4) {
  double lo = 0.0, hi = 1.0;
  while (!lp_feasibility_d(X, b, hi).feasible) hi *= 2.0;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (lp_feasibility_d(X, b, mid).feasible ? hi : lo) = mid;
  }
  return hi;
}

struct SearchOptions {
  int budget = 16;         // perturbed retries after the first attempt
  int norming_restarts = 32;
  std::uint64_t seed = 0;
};

struct CertificateSearch {
  bool found = false;
  EmbeddingCertificate certificate;
  LpFeasibility last;      // final LP outcome (holds the obstruction when not found)
  int attempts = 0;
  bool heuristic = false;  // norming functional found by ascent
};

inline CertificateSearch certificate_search(const UnconditionalLattice& X, std::span<const double> a_in, double epsilon,
                                            double C, const SearchOptions& opt = {}) {
  const std::size_t n = X.dim();
  if (a_in.size() != n) throw Error(ErrorCode::DimensionMismatch, "a differs from lattice dimension");
  Vec a(a_in.begin(), a_in.end());
  for (auto& t : a) t = std::abs(t);
  const double na = X.norm(a);
  if (!(na > 0)) throw Error(ErrorCode::InvalidArgument, "a must be non-zero");
  for (auto& t : a) t /= na;

  CertificateSearch out;
  auto nf = X.norming_functional(a, opt.norming_restarts);
  out.heuristic = nf.heuristic;
  Vec b0 = nf.b;
  Rng rng(derive_seed(opt.seed, 0xce27));
  std::normal_distribution<double> nd;
  for (int attempt = 0; attempt <= opt.budget; ++attempt) {
    Vec b = b0;
    if (attempt > 0) {
      // Other norming functionals, staying within the epsilon pairing slack.
      double sigma = epsilon * std::pow(0.5, attempt % 8);
      for (auto& t : b) t = std::abs(t + sigma * nd(rng));
      double dn = X.dual_norm(b);
      for (auto& t : b) t /= dn;
      if (!(dot(a, b) > 1.0 - epsilon)) continue;
    }
    ++out.attempts;
    out.last = lp_feasibility_d(X, b, C);
    if (out.last.feasible) {
      out.found = true;
      out.certificate = {a, b, out.last.d, C, epsilon};
      return out;
    }
  }
  return out;
}

// S c = (c_i b_i / d_i) on atoms of mass d_i, measured in L^{p,inf}_1.
struct DiagonalOperator {
  std::vector<int> atoms;  // lattice coordinates carried by an atom (d_i > 0)
  Vec multipliers;
  AtomicSpace measure;
  double p = 2.0;

  Vec apply(std::span<const double> c) const {
    Vec out(atoms.size());
    for (std::size_t k = 0; k < atoms.size(); ++k) out[k] = c[atoms[k]] * multipliers[k];
    return out;
  }
  double norm_of_image(std::span<const double> c) const { return detail::weak_r_sup(apply(c), measure.weights(), p, 1.0); }
};

inline DiagonalOperator build_S(const UnconditionalLattice& X, const EmbeddingCertificate& c) {
  DiagonalOperator S;
  S.p = X.p();
  Vec w;
  for (std::size_t i = 0; i < X.dim(); ++i) {
    if (c.d[i] > 0) {
      S.atoms.push_back(static_cast<int>(i));
      S.multipliers.push_back(c.b[i] / c.d[i]);
      w.push_back(c.d[i]);
    } else if (c.b[i] > 0) {
      throw Error(ErrorCode::PositivityViolation, "b_i > 0 on an atom with d_i = 0");
    }
  }
  if (w.empty()) throw Error(ErrorCode::SimplexViolation, "d has no positive entry");
  S.measure = AtomicSpace(w);
  return S;
}

struct SReport {
  double image_of_a = 0.0;      // ||S a||
  double full_set_value = 0.0;  // sum a_i b_i, the full-set term
  double max_ratio = 0.0;       // max ||S c|| / ||c|| over samples
  bool lower_ok = false;        // ||S a|| > 1 - epsilon
  bool upper_ok = false;        // max_ratio <= C
};

inline SReport verify_S(const UnconditionalLattice& X, const EmbeddingCertificate& c, const DiagonalOperator& S,
                        int samples = 1000, std::uint64_t seed = 0) {
  SReport r;
  r.image_of_a = S.norm_of_image(c.a);
  r.full_set_value = dot(c.a, c.b);
  r.lower_ok = r.image_of_a > 1.0 - c.epsilon;
  Rng rng(derive_seed(seed, 0x5a));
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> sparse(0, 3);
  for (int s = 0; s < samples; ++s) {
    Vec x(X.dim());
    for (auto& t : x) t = sparse(rng) == 0 ? 0.0 : nd(rng);
    if (s < static_cast<int>(X.dim())) std::fill(x.begin(), x.end(), 0.0), x[s] = 1.0;
    double nx = X.norm(x);
    if (!(nx > 0)) continue;
    r.max_ratio = std::max(r.max_ratio, S.norm_of_image(x) / nx);
  }
  r.max_ratio = std::max(r.max_ratio, r.image_of_a / X.norm(c.a));
  r.upper_ok = r.max_ratio <= c.C + 1e-9;
  return r;
}

// (sum_j N*(b chi_{I_j})^{p'} / (l N*(b)^{p'}))^{1/p'} for a cover with constant multiplicity l.
inline double cover_obstruction(const UnconditionalLattice& X, std::span<const double> b,
                                const std::vector<Mask>& cover) {
  const std::size_t n = X.dim();
  if (b.size() != n) throw Error(ErrorCode::DimensionMismatch, "b differs from lattice dimension");
  if (cover.empty()) throw Error(ErrorCode::CoverInvalid, "cover is empty");
  std::vector<int> cnt(n, 0);
  for (Mask I : cover) {
    if (I == 0 || (n < 32 && (I >> n) != 0)) throw Error(ErrorCode::CoverInvalid, "cover set is empty or out of range");
    for (std::size_t i = 0; i < n; ++i) cnt[i] += I >> i & 1;
  }
  if (std::any_of(cnt.begin(), cnt.end(), [&](int c) { return c != cnt[0]; }))
    throw Error(ErrorCode::CoverInvalid, "cover multiplicity is not constant");
  const double q = X.pconj(), full = std::pow(X.dual_norm(b), q);
  if (!(full > 0)) throw Error(ErrorCode::InvalidArgument, "b must be non-zero");
  double s = 0.0;
  for (Mask I : cover) s += std::pow(X.dual_norm(restrict_to(b, I)), q);
  return std::pow(s / (cnt[0] * full), 1.0 / q);
}

inline std::vector<Mask> parse_cover(const std::vector<std::vector<int>>& sets, std::size_t n) {
  std::vector<Mask> out;
  for (const auto& s : sets) {
    Mask m = 0;
    for (int i : s) {
      if (i < 0 || static_cast<std::size_t>(i) >= n) throw Error(ErrorCode::CoverInvalid, "cover index out of range");
      m |= Mask{1} << i;
    }
    out.push_back(m);
  }
  return out;
}

struct ObstructionOptions {
  int samples = 64;
  int max_sets = 6;
  int max_multiplicity = 3;
  long node_budget = 2000000;
  std::uint64_t seed = 0;
};

struct ObstructionResult {
  double value = 0.0;
  Vec b;
  std::vector<Mask> cover;
  int multiplicity = 1;
  bool exhaustive = true;
};

namespace detail {

// Best sum of phi over multisets of at most m subsets covering each atom exactly l times.
// Sets are chosen to contain the smallest deficient atom, in non-decreasing order
// while that atom stays the same, so each multiset is visited once.
struct CoverDfs {
  const Vec& phi;
  std::size_t n;
  int l, m;
  long budget;
  long nodes = 0;
  bool exhausted = false;
  double best = -1;
  std::vector<Mask> cur, best_cover;
  std::vector<int> cov;

  void run() {
    cov.assign(n, 0);
    go(n, 0, 0.0);
  }

  void go(std::size_t last_e, Mask last_set, double acc) {
    if (++nodes > budget) {
      exhausted = true;
      return;
    }
    std::size_t e = 0;
    while (e < n && cov[e] == l) ++e;
    if (e == n) {
      if (acc > best) best = acc, best_cover = cur;
      return;
    }
    if (static_cast<int>(cur.size()) == m) return;
    const Mask full = (Mask{1} << n) - 1;
    Mask start = (e == last_e) ? last_set : 1;
    for (Mask I = start; I <= full; ++I) {
      if (!(I >> e & 1)) continue;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) ok = !(I >> i & 1) || cov[i] < l;
      if (!ok) continue;
      for (std::size_t i = 0; i < n; ++i) cov[i] += I >> i & 1;
      cur.push_back(I);
      go(e, I, acc + phi[I]);
      cur.pop_back();
      for (std::size_t i = 0; i < n; ++i) cov[i] -= I >> i & 1;
      if (exhausted) return;
    }
  }
};

}  // namespace detail

inline ObstructionResult obstruction_search(const UnconditionalLattice& X, const ObstructionOptions& opt = {}) {
  const std::size_t n = X.dim();
  if (n > kMaxCoverDim) throw Error(ErrorCode::DimensionTooLarge, "cover enumeration limited to n <= 8");
  const double q = X.pconj();

  auto best_for = [&](const Vec& b, ObstructionResult& r) {
    auto phi = subset_dual_powers(X, b);
    const double full = phi[(std::size_t{1} << n) - 1];
    if (!(full > 0)) return;
    for (int l = 1; l <= opt.max_multiplicity; ++l) {
      detail::CoverDfs dfs{phi, n, l, opt.max_sets, opt.node_budget, 0, false, -1, {}, {}, {}};
      dfs.run();
      r.exhaustive = r.exhaustive && !dfs.exhausted;
      if (dfs.best < 0) continue;
      double v = std::pow(dfs.best / (l * full), 1.0 / q);
      if (v > r.value) {
        r.value = v;
        r.b = b;
        r.cover = dfs.best_cover;
        r.multiplicity = l;
      }
    }
  };

  ObstructionResult r;
  // 0/1 directions first, then seeded random points of the positive dual sphere.
  for (Mask I = 1; I < (Mask{1} << n); ++I) {
    Vec b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = I >> i & 1;
    best_for(b, r);
  }
  Rng rng(derive_seed(opt.seed, 0x0b5));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < opt.samples; ++s) {
    Vec b(n);
    for (auto& t : b) t = u(rng);
    best_for(b, r);
  }
  // Polish b for the winning cover.
  if (!r.cover.empty()) {
    auto val = [&](const Vec& b) {
      Vec ab(b);
      for (auto& t : ab) t = std::abs(t);
      if (!(X.dual_norm(ab) > 0)) return -std::numeric_limits<double>::infinity();
      return cover_obstruction(X, ab, r.cover);
    };
    AscentOptions ao;
    ao.max_evals = 20000;
    auto pol = perturbation_ascent(val, r.b, rng, ao);
    if (pol.value > r.value) {
      r.value = pol.value;
      for (auto& t : pol.x) t = std::abs(t);
      r.b = pol.x;
    }
  }
  double dn = X.dual_norm(r.b);
  for (auto& t : r.b) t /= dn;
  return r;
}

struct ProbeOptions {
  int samples = 8;
  int depth = 3;
  std::uint64_t seed = 0;
  RhoOptions rho{4, 3, 0, true, 1000, 1e-8};
  int resolution = 24;
};

struct ProbeResult {
  double max_ratio = 0.0;
  std::vector<std::string> expressions;
  Vec ratios;
  bool heuristic = true;
};

// sup over f of ||id^ f||_X / rho_{p,inf}(f), rho taken from the search (a lower bound).
inline ProbeResult extension_norm_probe(const UnconditionalLattice& X, const std::vector<Expr>& fs,
                                        const ProbeOptions& opt = {}) {
  const std::size_t n = X.dim();
  auto E = X.as_space(opt.resolution);
  Mat gens, I;
  for (std::size_t k = 0; k < n; ++k) {
    Vec e(n, 0.0);
    e[k] = 1.0;
    gens.push_back(e);
    I.push_back(e);
  }
  auto target = [&](std::span<const double> v) { return X.norm(v); };
  ProbeResult r;
  RhoOptions ro = opt.rho;
  ro.seed = opt.seed;
  for (const auto& f : fs) {
    auto lb = lower_bound_via_operator(f, gens, I, E, target, true);
    auto rho = rho_estimate(f, gens, E, NormTag::weak_l1(X.p()), ro);
    double ratio = rho.value > 0 ? lb.value / rho.value : 0.0;
    r.expressions.push_back(format(f));
    r.ratios.push_back(ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
  }
  return r;
}

inline ProbeResult extension_norm_probe(const UnconditionalLattice& X, const ProbeOptions& opt = {}) {
  Rng rng(derive_seed(opt.seed, 0x9e0));
  std::vector<Expr> fs;
  for (int s = 0; s < opt.samples; ++s) fs.push_back(random_expr(rng, static_cast<int>(X.dim()), opt.depth));
  return extension_norm_probe(X, fs, opt);
}

}  // namespace fbllab
