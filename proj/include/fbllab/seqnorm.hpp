#pragma once

// Norms on finitely supported functions over an atomic measure space:
// L^p, the weak-L^p quasinorm, the normed variants L^{p,inf}_r and the
// Lorentz l^{q,1} norm on counting measure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbllab/error.hpp"

namespace fbllab {

// Largest number of atoms for which arbitrary weights are handled by
// enumerating every subset.
inline constexpr std::size_t kMaxEnumeratedAtoms = 22;

class AtomicSpace {
 public:
  AtomicSpace() = default;
  explicit AtomicSpace(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw Error(ErrorCode::InvalidWeight, "atomic space needs at least one atom");
    for (double x : w_)
      if (!(x > 0.0) || !std::isfinite(x))
        throw Error(ErrorCode::InvalidWeight, "atom weights must be positive and finite");
  }
  static AtomicSpace counting(std::size_t n) { return AtomicSpace(std::vector<double>(n, 1.0)); }

  std::size_t size() const { return w_.size(); }
  const std::vector<double>& weights() const { return w_; }
  double weight(std::size_t i) const { return w_[i]; }
  double total() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }
  bool uniform() const {
    return std::all_of(w_.begin(), w_.end(), [&](double x) { return x == w_.front(); });
  }
  bool is_counting() const {
    return std::all_of(w_.begin(), w_.end(), [](double x) { return x == 1.0; });
  }

 private:
  std::vector<double> w_;
};

struct WeightedFunction {
  std::vector<double> values;
  AtomicSpace space;

  WeightedFunction(std::vector<double> v, AtomicSpace s) : values(std::move(v)), space(std::move(s)) {
    if (values.size() != space.size())
      throw Error(ErrorCode::DimensionMismatch, "values and weights differ in length");
  }
  static WeightedFunction counting(std::vector<double> v) {
    auto n = v.size();
    return WeightedFunction(std::move(v), AtomicSpace::counting(n));
  }
};

// Exponent p in (1, inf) together with its conjugate.
class PExponent {
 public:
  PExponent(double p) : p_(p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidExponent, "p must lie in (1, inf)");
  }
  double value() const { return p_; }
  double conj() const { return p_ / (p_ - 1.0); }
  operator double() const { return p_; }

 private:
  double p_;
};

inline double conjugate(double p) { return p / (p - 1.0); }

namespace detail {

struct Atom {
  double value;  // |h_i|
  double weight;
};

// Stable decreasing order of |h|; ties keep the original order.
inline std::vector<Atom> rearrange(std::span<const double> h, std::span<const double> w) {
  std::vector<std::size_t> idx(h.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(h[a]) > std::abs(h[b]); });
  std::vector<Atom> out;
  out.reserve(h.size());
  for (auto i : idx) out.push_back({std::abs(h[i]), w.empty() ? 1.0 : w[i]});
  return out;
}

inline bool all_zero(std::span<const double> h) {
  return std::all_of(h.begin(), h.end(), [](double x) { return x == 0.0; });
}

inline bool uniform(std::span<const double> w) {
  return w.empty() || std::all_of(w.begin(), w.end(), [&](double x) { return x == w.front(); });
}

// sup over non-empty A of mu(A)^{1/p - 1/r} (sum_A |h|^r mu)^{1/r}.
// r == 1 gives the L^{p,inf}_1 norm without any pow on the values.
inline double weak_r_sup(std::span<const double> h, std::span<const double> w, double p, double r) {
  if (all_zero(h)) return 0.0;
  const std::size_t n = h.size();
  const double e = 1.0 / p - 1.0 / r;
  auto term = [&](double v, double wt) { return (r == 1.0 ? v : std::pow(v, r)) * wt; };
  auto score = [&](double mass, double s) {
    double root = r == 1.0 ? s : std::pow(s, 1.0 / r);
    return std::pow(mass, e) * root;
  };

  if (uniform(w)) {
    // Among sets of fixed size the largest values win.
    auto atoms = rearrange(h, w);
    double best = 0.0, mass = 0.0, s = 0.0;
    for (const auto& a : atoms) {
      mass += a.weight;
      s += term(a.value, a.weight);
      best = std::max(best, score(mass, s));
    }
    return best;
  }

  if (n > kMaxEnumeratedAtoms)
    throw Error(ErrorCode::DimensionTooLarge,
                "non-uniform weights with " + std::to_string(n) + " atoms exceed the enumeration limit");

  // Meet in the middle: subset sums of each half, then every combination.
  const std::size_t lo = n / 2, hi = n - lo;
  auto half_sums = [&](std::size_t off, std::size_t len, std::vector<double>& m, std::vector<double>& s) {
    m.assign(std::size_t{1} << len, 0.0);
    s.assign(std::size_t{1} << len, 0.0);
    for (std::size_t mask = 1; mask < m.size(); ++mask) {
      auto bit = static_cast<std::size_t>(__builtin_ctzll(mask));
      auto rest = mask & (mask - 1);
      m[mask] = m[rest] + w[off + bit];
      s[mask] = s[rest] + term(std::abs(h[off + bit]), w[off + bit]);
    }
  };
  std::vector<double> mlo, slo, mhi, shi;
  half_sums(0, lo, mlo, slo);
  half_sums(lo, hi, mhi, shi);
  double best = 0.0;
  for (std::size_t a = 0; a < mhi.size(); ++a)
    for (std::size_t b = 0; b < mlo.size(); ++b) {
      if (a == 0 && b == 0) continue;
      best = std::max(best, score(mhi[a] + mlo[b], shi[a] + slo[b]));
    }
  return best;
}

inline double lp(std::span<const double> h, std::span<const double> w, double p) {
  if (all_zero(h)) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += std::pow(std::abs(h[i]), p) * (w.empty() ? 1.0 : w[i]);
  return std::pow(s, 1.0 / p);
}

inline double weak_quasi(std::span<const double> h, std::span<const double> w, double p) {
  if (all_zero(h)) return 0.0;
  double best = 0.0, mass = 0.0;
  for (const auto& a : rearrange(h, w)) {
    mass += a.weight;
    best = std::max(best, a.value * std::pow(mass, 1.0 / p));
  }
  return best;
}

inline double lorentz_q1(std::span<const double> h, double q) {
  if (all_zero(h)) return 0.0;
  double s = 0.0;
  std::size_t k = 0;
  for (const auto& a : rearrange(h, {})) {
    ++k;
    s += a.value * (std::pow(double(k), 1.0 / q) - std::pow(double(k - 1), 1.0 / q));
  }
  return s;
}

}  // namespace detail

inline std::vector<std::pair<double, double>> decreasing_rearrangement(const WeightedFunction& h) {
  std::vector<std::pair<double, double>> out;
  for (const auto& a : detail::rearrange(h.values, h.space.weights())) out.emplace_back(a.value, a.weight);
  return out;
}

inline double lp_norm(const WeightedFunction& h, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidExponent, "lp_norm needs p >= 1");
  return detail::lp(h.values, h.space.weights(), p);
}

inline double weak_quasinorm(const WeightedFunction& h, PExponent p) {
  return detail::weak_quasi(h.values, h.space.weights(), p);
}

inline double weak_L1_norm(const WeightedFunction& h, PExponent p) {
  return detail::weak_r_sup(h.values, h.space.weights(), p, 1.0);
}

inline double weak_Lr_norm(const WeightedFunction& h, PExponent p, double r) {
  if (!(r >= 1.0) || !(r < p.value())) throw Error(ErrorCode::InvalidExponent, "weak_Lr_norm needs 1 <= r < p");
  return detail::weak_r_sup(h.values, h.space.weights(), p, r);
}

inline double lorentz_q1_norm(const WeightedFunction& h, double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw Error(ErrorCode::InvalidExponent, "lorentz_q1_norm needs q > 1");
  if (!h.space.is_counting()) throw Error(ErrorCode::NonCountingMeasure, "Lorentz norm is defined on counting measure");
  return detail::lorentz_q1(h.values, q);
}

struct SandwichReport {
  double lhs = 0;    // weak quasinorm
  double mid = 0;    // L^{p,inf}_r norm
  double rhs = 0;    // (p/(p-r))^{1/r} * lhs
  double slack = 0;  // min(mid - lhs, rhs - mid)
  bool holds = false;
};

inline SandwichReport sandwich_check(const WeightedFunction& h, PExponent p, double r) {
  SandwichReport s;
  s.lhs = weak_quasinorm(h, p);
  s.mid = weak_Lr_norm(h, p, r);
  s.rhs = std::pow(p / (p - r), 1.0 / r) * s.lhs;
  s.slack = std::min(s.mid - s.lhs, s.rhs - s.mid);
  const double tol = 1e-9 * std::max(1.0, s.rhs);
  s.holds = s.mid >= s.lhs - tol && s.mid <= s.rhs + tol;
  return s;
}

// Norm selector shared by witnesses, operator bounds and the CLI.
struct NormTag {
  enum class Kind { Lp, WeakQuasi, WeakL1, WeakLr, LorentzQ1 };
  Kind kind = Kind::Lp;
  double p = 2.0;  // q for LorentzQ1
  double r = 1.0;

  static NormTag lp(double p) { return {Kind::Lp, p, 1.0}; }
  static NormTag weak_quasi(double p) { return {Kind::WeakQuasi, p, 1.0}; }
  static NormTag weak_l1(double p) { return {Kind::WeakL1, p, 1.0}; }
  static NormTag weak_lr(double p, double r) { return {Kind::WeakLr, p, r}; }
  static NormTag lorentz_q1(double q) { return {Kind::LorentzQ1, q, 1.0}; }

  // WeakQuasi is only a quasinorm, so suprema of it over polytopes are not vertex maxima.
  bool is_norm() const { return kind != Kind::WeakQuasi; }

  void validate() const {
    switch (kind) {
      case Kind::Lp:
        if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidExponent, "lp tag needs p >= 1");
        break;
      case Kind::LorentzQ1:
        if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidExponent, "lorentz tag needs q > 1");
        break;
      case Kind::WeakLr:
        PExponent{p};
        if (!(r >= 1.0) || !(r < p)) throw Error(ErrorCode::InvalidExponent, "weak-lr tag needs 1 <= r < p");
        break;
      default:
        PExponent{p};
    }
  }

  std::string str() const {
    auto num = [](double x) {
      std::string s = std::to_string(x);
      s.erase(s.find_last_not_of('0') + 1);
      if (s.back() == '.') s.pop_back();
      return s;
    };
    switch (kind) {
      case Kind::Lp: return "lp:p=" + num(p);
      case Kind::WeakQuasi: return "weak-quasi:p=" + num(p);
      case Kind::WeakL1: return "weak-l1:p=" + num(p);
      case Kind::WeakLr: return "weak-lr:p=" + num(p) + ",r=" + num(r);
      case Kind::LorentzQ1: return "lorentz-q1:q=" + num(p);
    }
    return "";
  }
};

// Tagged norm of values over atoms with weights w (empty w = counting).
inline double tagged_norm(const NormTag& t, std::span<const double> h, std::span<const double> w = {}) {
  switch (t.kind) {
    case NormTag::Kind::Lp: return detail::lp(h, w, t.p);
    case NormTag::Kind::WeakQuasi: return detail::weak_quasi(h, w, t.p);
    case NormTag::Kind::WeakL1: return detail::weak_r_sup(h, w, t.p, 1.0);
    case NormTag::Kind::WeakLr: return detail::weak_r_sup(h, w, t.p, t.r);
    case NormTag::Kind::LorentzQ1:
      if (!w.empty() && !std::all_of(w.begin(), w.end(), [](double x) { return x == 1.0; }))
        throw Error(ErrorCode::NonCountingMeasure, "Lorentz norm is defined on counting measure");
      return detail::lorentz_q1(h, t.p);
  }
  return 0.0;
}

inline double tagged_norm(const NormTag& t, const WeightedFunction& h) {
  return tagged_norm(t, h.values, h.space.weights());
}

}  // namespace fbllab
