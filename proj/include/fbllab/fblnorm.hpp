#pragma once

// Lower bounds for the free-lattice norms rho(f) = sup N((f(x*_k))_k) over
// functional tuples whose tagged norm on the unit ball of E is at most one.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fbllab/error.hpp"
#include "fbllab/latexpr.hpp"
#include "fbllab/search.hpp"
#include "fbllab/seqnorm.hpp"
#include "fbllab/space.hpp"

namespace fbllab {

inline double gamma_p(PExponent p) { return std::pow(1.0 - 1.0 / p, 1.0 / p - 1.0); }

struct WitnessTuple {
  Mat functionals;   // each in R^d
  NormTag tag;
  Vec weights;       // atom masses; empty means counting measure
};

struct Bound {
  double value = 0.0;
  bool heuristic = false;
};

// sup over x in B_E of N(Tx) where row i of T is a functional.
inline Bound operator_norm(const FiniteSpace& E, const Mat& T,
                           const std::function<double(std::span<const double>)>& N, bool convex) {
  for (const auto& row : T)
    if (row.size() != E.dim()) throw Error(ErrorCode::DimensionMismatch, "operator row dimension differs from E");
  Vec img(T.size());
  auto phi = [&](std::span<const double> x) {
    for (std::size_t i = 0; i < T.size(); ++i) img[i] = dot(T[i], x);
    return N(img);
  };
  Mat hints;
  if (E.kind() == FiniteSpace::Kind::Lq)
    for (const auto& row : T)
      if (std::any_of(row.begin(), row.end(), [](double t) { return t != 0.0; }))
        hints.push_back(FiniteSpace::lq(E.q() / (E.q() - 1.0), E.dim()).norming_functional(row));
  auto s = E.sup_homogeneous(phi, hints, convex);
  return {s.value, s.heuristic};
}

inline Bound operator_norm(const FiniteSpace& E, const Mat& T, const NormTag& tag, std::span<const double> w = {}) {
  Vec wv(w.begin(), w.end());
  return operator_norm(E, T, [&](std::span<const double> v) { return tagged_norm(tag, v, wv); }, tag.is_norm());
}

inline Bound constraint_value(const WitnessTuple& W, const FiniteSpace& E) {
  if (W.functionals.empty()) throw Error(ErrorCode::InvalidArgument, "witness tuple is empty");
  if (!W.weights.empty() && W.weights.size() != W.functionals.size())
    throw Error(ErrorCode::DimensionMismatch, "witness weights differ in length from functionals");
  return operator_norm(E, W.functionals, W.tag, W.weights);
}

struct WitnessValue {
  double value = 0.0;
  double numerator = 0.0;
  double constraint = 0.0;
  bool heuristic = false;
};

inline WitnessValue witness_value(const Expr& f, const Mat& gens, const WitnessTuple& W, const FiniteSpace& E) {
  Vec vals(W.functionals.size());
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = evaluate(f, gens, W.functionals[k]);
  WitnessValue r;
  auto c = constraint_value(W, E);
  r.constraint = c.value;
  r.heuristic = c.heuristic;
  if (!(c.value > 0.0)) throw Error(ErrorCode::DegenerateWitness, "witness constraint is zero");
  r.numerator = tagged_norm(W.tag, vals, W.weights);
  r.value = r.numerator / r.constraint;
  return r;
}

struct RhoOptions {
  int restarts = 64;
  int n_max = 6;
  std::uint64_t seed = 0;
  bool weighted = false;   // also search over atom masses
  long evals_per_restart = 3000;
  double min_step = 1e-9;
};

struct TraceEntry {
  int n;
  int restart;
  double start;
  double end;
  bool improved_best;
};

struct RhoEstimate {
  double value = 0.0;
  WitnessTuple witness;  // normalized so that its constraint is 1
  std::vector<TraceEntry> trace;
  bool heuristic = false;
};

// Seeded restarts over tuple sizes 1..n_max. Run (n, r) has its own stream,
// so enlarging n_max or restarts only adds runs and never lowers the value.
inline RhoEstimate rho_estimate(const Expr& f, const Mat& gens, const FiniteSpace& E, const NormTag& tag,
                                const RhoOptions& opt = {}) {
  tag.validate();
  if (gens.empty()) throw Error(ErrorCode::ArityMismatch, "no generators given");
  if (static_cast<std::size_t>(f.arity()) > gens.size())
    throw Error(ErrorCode::ArityMismatch, "expression uses more generators than given");
  for (const auto& g : gens)
    if (g.size() != E.dim()) throw Error(ErrorCode::DimensionMismatch, "generator dimension differs from E");
  if (opt.restarts < 1 || opt.n_max < 1) throw Error(ErrorCode::InvalidArgument, "restarts and n_max must be >= 1");

  const std::size_t d = E.dim(), K = gens.size();
  CompiledExpr G(f);

  // Norming functionals of the generators seed the first restarts.
  Mat norming;
  for (const auto& x : gens) norming.push_back(E.norming_functional(x));

  RhoEstimate best;
  best.value = -1.0;
  if (opt.weighted) {
    // Counting witnesses are weighted witnesses with unit masses; start from them.
    RhoOptions plain = opt;
    plain.weighted = false;
    best = rho_estimate(f, gens, E, tag, plain);
    best.witness.weights.assign(best.witness.functionals.size(), 1.0);
  }
  std::vector<double> gv(K);

  for (int n = 1; n <= opt.n_max; ++n) {
    const std::size_t npar = n * d + (opt.weighted ? n : 0);
    Mat fun(n, Vec(d));
    Vec w, vals(n);

    auto unpack = [&](const Vec& x) {
      for (int k = 0; k < n; ++k)
        for (std::size_t j = 0; j < d; ++j) fun[k][j] = x[k * d + j];
      if (opt.weighted) {
        w.resize(n);
        for (int k = 0; k < n; ++k) w[k] = std::exp(std::clamp(x[n * d + k], -30.0, 30.0));
      }
    };
    auto objective = [&](const Vec& x) {
      unpack(x);
      auto c = operator_norm(E, fun, tag, w);
      if (!(c.value > 0.0)) return -std::numeric_limits<double>::infinity();
      for (int k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < K; ++i) gv[i] = dot(gens[i], fun[k]);
        vals[k] = G(gv);
      }
      return tagged_norm(tag, vals, w) / c.value;
    };

    for (int r = 0; r < opt.restarts; ++r) {
      Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)));
      std::normal_distribution<double> nd;
      Vec x(npar, 0.0);
      if (r < static_cast<int>(K)) {
        for (int k = 0; k < n; ++k)
          for (std::size_t j = 0; j < d; ++j) x[k * d + j] = norming[(r + k) % K][j];
      } else {
        for (std::size_t i = 0; i < n * d; ++i) x[i] = nd(rng);
      }
      double start = objective(x);
      AscentOptions ao;
      ao.max_evals = opt.evals_per_restart;
      ao.min_step = opt.min_step;
      ao.random_dirs = 2;
      auto res = perturbation_ascent(objective, x, rng, ao);
      bool better = res.value > best.value;
      best.trace.push_back({n, r, start, res.value, better});
      if (!better) continue;
      unpack(res.x);
      auto c = operator_norm(E, fun, tag, w);
      best.value = res.value;
      best.witness.functionals = fun;
      for (auto& row : best.witness.functionals)
        for (auto& t : row) t /= c.value;
      best.witness.tag = tag;
      best.witness.weights = opt.weighted ? w : Vec{};
    }
  }
  best.heuristic = !E.exact() || !tag.is_norm();
  return best;
}

// ||T^ f||_target / ||T|| for T: E -> R^m given as an m x d matrix.
inline Bound lower_bound_via_operator(const Expr& f, const Mat& gens, const Mat& T, const FiniteSpace& E,
                                      const std::function<double(std::span<const double>)>& target, bool convex = true) {
  Mat images;
  for (const auto& x : gens) {
    if (x.size() != E.dim()) throw Error(ErrorCode::DimensionMismatch, "generator dimension differs from E");
    Vec tx(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) tx[i] = dot(T[i], x);
    images.push_back(std::move(tx));
  }
  auto opn = operator_norm(E, T, target, convex);
  if (!(opn.value > 0.0)) throw Error(ErrorCode::ZeroOperator, "operator has zero norm");
  return {target(evaluate_image(f, images)) / opn.value, opn.heuristic};
}

inline Bound lower_bound_via_operator(const Expr& f, const Mat& gens, const Mat& T, const FiniteSpace& E,
                                      const NormTag& tag, const AtomicSpace& target) {
  if (target.size() != T.size()) throw Error(ErrorCode::DimensionMismatch, "target atoms differ from operator rows");
  const auto& w = target.weights();
  return lower_bound_via_operator(f, gens, T, E, [&](std::span<const double> v) { return tagged_norm(tag, v, w); },
                                  tag.is_norm());
}

// S g = sum g(y_i) chi_{V_i}: the operator realizing a witness tuple.
inline Mat operator_from_witness(const WitnessTuple& W) { return W.functionals; }

}  // namespace fbllab
