#pragma once

// 1-unconditional finite-dimensional lattices X with primal and dual norm
// oracles, each carrying the exponent p of the target weak-L^p space.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fbllab/error.hpp"
#include "fbllab/search.hpp"
#include "fbllab/seqnorm.hpp"
#include "fbllab/simplex.hpp"
#include "fbllab/space.hpp"

namespace fbllab {

struct Norming {
  Vec b;          // b >= 0, dual norm 1
  double value;   // <|a|, b> = ||a||
  bool heuristic;
};

class UnconditionalLattice {
 public:
  enum class Kind { Lp, WeakLpN, X3, Polytope };

  static UnconditionalLattice lp(double p, std::size_t n) { return make(Kind::Lp, p, n); }
  static UnconditionalLattice weak_lp(double p, std::size_t n) { return make(Kind::WeakLpN, p, n); }
  static UnconditionalLattice x3(double p) { return make(Kind::X3, p, 3); }

  // Unit ball conv of the given points under all coordinate sign changes.
  static UnconditionalLattice polytope(double p, const Mat& points) {
    if (points.empty()) throw Error(ErrorCode::InvalidLattice, "polytope lattice needs points");
    auto L = make(Kind::Polytope, p, points.front().size());
    for (const auto& v : points) {
      if (v.size() != L.n_) throw Error(ErrorCode::DimensionMismatch, "points differ in dimension");
      Vec a(v);
      for (auto& t : a) t = std::abs(t);
      L.pts_.push_back(a);
    }
    Mat all;
    for (const auto& a : L.pts_)
      for (std::size_t s = 0; s < (std::size_t{1} << L.n_); ++s) {
        Vec v(a);
        for (std::size_t i = 0; i < L.n_; ++i)
          if (s >> i & 1) v[i] = -v[i];
        all.push_back(v);
      }
    L.space_ = std::make_shared<FiniteSpace>(FiniteSpace::polytope(all));
    return L;
  }

  // Random planar lattice whose ball is cut out by tangent lines to the l^p
  // circle at 0, pi/2 and `cuts` random angles between. It contains B_{l^p}
  // and has ||e_i|| = 1, so the upper p-estimate holds with constant 1.
  static UnconditionalLattice random_plane(Rng& rng, double p, int cuts) {
    PExponent{p};
    std::uniform_real_distribution<double> u(0.0, std::numbers::pi / 2);
    Vec th{0.0, std::numbers::pi / 2};
    for (int k = 0; k < cuts; ++k) th.push_back(u(rng));
    std::sort(th.begin(), th.end());
    // Normal of the tangent line at the l^p-circle point in direction t, scaled so <n, x> = 1.
    auto normal = [&](double t) {
      if (t == 0.0) return std::pair{1.0, 0.0};
      if (t == std::numbers::pi / 2) return std::pair{0.0, 1.0};
      double c = std::cos(t), s = std::sin(t), r = std::pow(std::pow(c, p) + std::pow(s, p), 1.0 / p);
      c /= r, s /= r;
      return std::pair{std::pow(c, p - 1), std::pow(s, p - 1)};
    };
    Mat pts;
    for (std::size_t k = 0; k + 1 < th.size(); ++k) {
      auto [a1, b1] = normal(th[k]);
      auto [a2, b2] = normal(th[k + 1]);
      double det = a1 * b2 - a2 * b1;
      if (std::abs(det) < 1e-12) continue;
      pts.push_back({(b2 - b1) / det, (a1 - a2) / det});
    }
    return polytope(p, pts);
  }

  // "X3:p=2", "lp:p=2,n=3", "weaklp:p=2,n=4"
  static UnconditionalLattice parse(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char c) { return std::tolower(c); });
    std::map<std::string, double> kv;
    if (colon != std::string::npos) {
      std::stringstream ss(spec.substr(colon + 1));
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidLattice, "expected key=value in '" + item + "'");
        try {
          kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidLattice, "bad number in '" + item + "'");
        }
      }
    }
    auto get = [&](const std::string& k) {
      auto it = kv.find(k);
      if (it == kv.end()) throw Error(ErrorCode::InvalidLattice, "lattice '" + spec + "' is missing " + k);
      return it->second;
    };
    auto count = [&](const std::string& k) {
      double v = get(k);
      if (v < 1 || v != std::floor(v) || v > 20) throw Error(ErrorCode::InvalidLattice, k + " must be an integer in [1, 20]");
      return static_cast<std::size_t>(v);
    };
    if (kind == "x3") return x3(get("p"));
    if (kind == "lp") return lp(get("p"), count("n"));
    if (kind == "weaklp") return weak_lp(get("p"), count("n"));
    throw Error(ErrorCode::InvalidLattice, "unknown lattice '" + kind + "'");
  }

  Kind kind() const { return kind_; }
  std::size_t dim() const { return n_; }
  double p() const { return p_; }
  double pconj() const { return p_ / (p_ - 1.0); }
  bool polyhedral() const { return kind_ == Kind::WeakLpN || kind_ == Kind::Polytope; }
  bool exact_primal() const { return kind_ != Kind::X3; }

  std::string id() const {
    auto num = [](double x) {
      std::ostringstream o;
      o << x;
      return o.str();
    };
    switch (kind_) {
      case Kind::Lp: return "lp:p=" + num(p_) + ",n=" + std::to_string(n_);
      case Kind::WeakLpN: return "weaklp:p=" + num(p_) + ",n=" + std::to_string(n_);
      case Kind::X3: return "X3:p=" + num(p_);
      case Kind::Polytope: return "polytope:p=" + num(p_) + ",n=" + std::to_string(n_);
    }
    return "";
  }

  double dual_norm(std::span<const double> b) const {
    check(b);
    switch (kind_) {
      case Kind::Lp: return lq_norm(b, pconj());
      case Kind::WeakLpN: return detail::lorentz_q1(b, pconj());
      case Kind::X3: {
        const double q = pconj();
        double m = 0.0;
        for (int i = 0; i < 3; ++i) {
          double s = std::abs(b[(i + 1) % 3]) + std::abs(b[(i + 2) % 3]);
          m = std::max(m, std::pow(std::pow(std::abs(b[i]), q) + std::pow(s, q), 1.0 / q));
        }
        return m;
      }
      case Kind::Polytope: {
        double m = 0.0;
        for (const auto& v : pts_) {
          double s = 0.0;
          for (std::size_t i = 0; i < n_; ++i) s += std::abs(b[i]) * v[i];
          m = std::max(m, s);
        }
        return m;
      }
    }
    return 0.0;
  }

  double norm(std::span<const double> x) const {
    check(x);
    switch (kind_) {
      case Kind::Lp: return lq_norm(x, p_);
      case Kind::WeakLpN: return detail::weak_r_sup(x, {}, p_, 1.0);
      case Kind::Polytope: return space_->norm(x);
      case Kind::X3: {
        Vec a(x.begin(), x.end());
        for (auto& t : a) t = std::abs(t);
        if (std::all_of(a.begin(), a.end(), [](double t) { return t == 0.0; })) return 0.0;
        return golden_norming(a).value;
      }
    }
    return 0.0;
  }

  // b >= 0 in the dual unit ball maximizing <|a|, b>.
  // Non-polyhedral dual balls use `restarts` ascent runs.
  Norming norming_functional(std::span<const double> a, int restarts = 32) const {
    check(a);
    Vec abs_a(a.begin(), a.end());
    for (auto& t : abs_a) t = std::abs(t);
    if (std::all_of(abs_a.begin(), abs_a.end(), [](double t) { return t == 0.0; })) {
      Vec b(n_, 0.0);
      b[0] = 1.0 / dual_norm(Vec{unit(0)});
      return {b, 0.0, false};
    }
    switch (kind_) {
      case Kind::Lp: {
        const double na = lq_norm(abs_a, p_);
        Vec b(n_);
        for (std::size_t i = 0; i < n_; ++i) b[i] = std::pow(abs_a[i] / na, p_ - 1.0);
        return {b, na, false};
      }
      case Kind::WeakLpN: {
        // The dual ball has vertices |E|^{-1/p'} chi_E; the best E is a top-k set.
        std::vector<std::size_t> idx(n_);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return abs_a[i] > abs_a[j]; });
        double best = -1, s = 0;
        std::size_t bk = 1;
        for (std::size_t k = 1; k <= n_; ++k) {
          s += abs_a[idx[k - 1]];
          double v = s * std::pow(double(k), -1.0 / pconj());
          if (v > best) best = v, bk = k;
        }
        Vec b(n_, 0.0);
        for (std::size_t k = 0; k < bk; ++k) b[idx[k]] = std::pow(double(bk), -1.0 / pconj());
        return {b, best, false};
      }
      case Kind::Polytope: {
        // max <|a|, b> s.t. <v, b> <= 1 for each generating point, b >= 0.
        std::vector<LpRow> rows;
        for (const auto& v : pts_) rows.push_back({v, Relation::LessEq, 1.0});
        auto r = solve_lp(abs_a, rows);
        if (r.status != LpResult::Status::Optimal) throw Error(ErrorCode::NumericalInstability, "norming LP failed");
        return {r.x, r.objective, false};
      }
      case Kind::X3: return ratio_ascent(abs_a, restarts);
    }
    return {};
  }

  // E = X as a finite space for the free-lattice estimators.
  FiniteSpace as_space(int resolution = 24) const {
    switch (kind_) {
      case Kind::Lp: return FiniteSpace::lq(p_, n_);
      case Kind::Polytope: return *space_;
      case Kind::WeakLpN: {
        if (n_ > 5) throw Error(ErrorCode::DimensionTooLarge, "weak-lp ball vertices listed only for n <= 5");
        // Vertices are the signed permutations of (k^{1/p'} - (k-1)^{1/p'})_k.
        Vec w(n_);
        for (std::size_t k = 1; k <= n_; ++k) w[k - 1] = std::pow(double(k), 1 / pconj()) - std::pow(double(k - 1), 1 / pconj());
        std::vector<std::size_t> perm(n_);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Mat v;
        do {
          for (std::size_t s = 0; s < (std::size_t{1} << n_); ++s) {
            Vec x(n_);
            for (std::size_t i = 0; i < n_; ++i) x[perm[i]] = (s >> i & 1) ? -w[i] : w[i];
            v.push_back(x);
          }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return FiniteSpace::polytope(v);
      }
      case Kind::X3: {
        // B_X is the hull of the balls {|x_i|^p + max(|x_j|,|x_k|)^p <= 1}; take points on
        // their extreme curves (u, t, t), u^p + t^p = 1. The result is inscribed, hence approximate.
        Mat v;
        for (int i = 0; i < 3; ++i)
          for (int k = 0; k <= resolution; ++k) {
            double th = (std::numbers::pi / 2) * k / resolution;
            double c = std::cos(th), s = std::sin(th);
            double nrm = std::pow(std::pow(c, p_) + std::pow(s, p_), 1.0 / p_);
            double u = c / nrm, t = s / nrm;
            for (int sj : {1, -1})
              for (int sk : {1, -1}) {
                Vec x(3);
                x[i] = u;
                x[(i + 1) % 3] = sj * t;
                x[(i + 2) % 3] = sk * t;
                v.push_back(x);
              }
          }
        return FiniteSpace::polytope(v, true);
      }
    }
    throw Error(ErrorCode::InvalidLattice, "no finite-space realization");
  }

 private:
  static UnconditionalLattice make(Kind k, double p, std::size_t n) {
    PExponent{p};
    if (n < 1) throw Error(ErrorCode::InvalidLattice, "dimension must be >= 1");
    UnconditionalLattice L;
    L.kind_ = k;
    L.p_ = p;
    L.n_ = n;
    return L;
  }

  Vec unit(std::size_t i) const {
    Vec e(n_, 0.0);
    e[i] = 1.0;
    return e;
  }

  void check(std::span<const double> x) const {
    if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "vector length differs from lattice dimension");
  }

  double ratio(const Vec& a, const Vec& b) const {
    Vec ab(b);
    for (auto& t : ab) t = std::abs(t);
    double d = dual_norm(ab);
    return d > 0 ? dot(a, ab) / d : -std::numeric_limits<double>::infinity();
  }

  // Golden-section maximum of a quasi-concave g on [0, 1].
  template <class G>
  static std::pair<double, double> golden_max(G&& g, int iters = 56) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double lo = 0, hi = 1, x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    for (int k = 0; k < iters; ++k) {
      if (f1 < f2) lo = x1, x1 = x2, f1 = f2, x2 = lo + r * (hi - lo), f2 = g(x2);
      else hi = x2, x2 = x1, f2 = f1, x1 = hi - r * (hi - lo), f1 = g(x1);
    }
    double best = 0.5 * (lo + hi), v = g(best);
    for (double e : {0.0, 1.0})
      if (double ve = g(e); ve > v) v = ve, best = e;
    return {best, v};
  }

  // On the simplex b = (t, (1-t)s, (1-t)(1-s)) the ratio <a, b> / N*(b) is
  // quasi-concave in s for fixed t, and its maximum over s is quasi-concave in t
  // (projection of convex superlevel sets), so nested golden sections converge.
  Norming golden_norming(const Vec& a) const {
    auto point = [](double t, double s) { return Vec{t, (1 - t) * s, (1 - t) * (1 - s)}; };
    auto inner = [&](double t) { return golden_max([&](double s) { return ratio(a, point(t, s)); }); };
    auto [t, v] = golden_max([&](double t) { return inner(t).second; });
    Vec b = point(t, inner(t).first);
    double d = dual_norm(b);
    for (auto& x : b) x /= d;
    (void)v;
    return {b, dot(a, b), true};
  }

  // max <a, |b|> / N*(b) by restarts of the perturbation ascent.
  Norming ratio_ascent(const Vec& a, int restarts) const {
    auto ratio = [&](const Vec& b) { return this->ratio(a, b); };
    auto golden = golden_norming(a);
    Mat starts{golden.b, a, Vec(n_, 1.0)};
    Vec ap(a);
    for (auto& t : ap) t = std::pow(t, p_ - 1.0);
    starts.push_back(ap);
    for (std::size_t i = 0; i < n_; ++i) starts.push_back(unit(i));
    Rng rng(0x3a3a3aULL);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    while (starts.size() < static_cast<std::size_t>(std::max(restarts, 1))) {
      Vec b(n_);
      for (auto& t : b) t = u(rng);
      starts.push_back(b);
    }
    AscentOptions opt;
    opt.min_step = 1e-13;
    opt.random_dirs = 6;
    opt.max_evals = 8000;
    starts.resize(std::max<std::size_t>(restarts, 1));
    Vec best;
    double bv = -1;
    for (const auto& s : starts) {
      auto r = perturbation_ascent(ratio, s, rng, opt);
      if (r.value > bv) bv = r.value, best = r.x;
    }
    for (auto& t : best) t = std::abs(t);
    double d = dual_norm(best);
    for (auto& t : best) t /= d;
    if (golden.value >= dot(a, best)) return golden;
    return {best, dot(a, best), true};
  }

  Kind kind_ = Kind::Lp;
  double p_ = 2.0;
  std::size_t n_ = 0;
  Mat pts_;
  std::shared_ptr<FiniteSpace> space_;
};

}  // namespace fbllab
