#pragma once

// Seed derivation and a derivative-free ascent used by the heuristic searches.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fbllab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (master, a, b).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

struct AscentOptions {
  double step = 0.5;       // initial step, relative to max |x_i|
  double min_step = 1e-12;
  double decay = 0.5;
  int random_dirs = 4;     // extra random directions per sweep
  long max_evals = 200000;
};

struct AscentResult {
  std::vector<double> x;
  double value;
  long evals;
  int improvements;
};

// Coordinatewise perturbation ascent with multiplicative step decay.
// f may return -inf to reject a point.
inline AscentResult perturbation_ascent(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, Rng& rng, const AscentOptions& opt = {}) {
  AscentResult r{x, f(x), 1, 0};
  const std::size_t n = x.size();
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  double step = opt.step;
  std::normal_distribution<double> nd;
  std::vector<double> dir(n), trial(n);
  auto attempt = [&](const std::vector<double>& d, double h) {
    for (int sgn : {1, -1}) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = r.x[i] + sgn * h * d[i];
      double v = f(trial);
      ++r.evals;
      if (v > r.value) {
        r.value = v;
        r.x = trial;
        ++r.improvements;
        return true;
      }
    }
    return false;
  };
  while (step >= opt.min_step && r.evals < opt.max_evals) {
    bool moved = false;
    const double h = step * scale;
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(dir.begin(), dir.end(), 0.0);
      dir[i] = 1.0;
      moved |= attempt(dir, h);
    }
    for (int k = 0; k < opt.random_dirs; ++k) {
      double norm = 0.0;
      for (auto& d : dir) {
        d = nd(rng);
        norm += d * d;
      }
      norm = std::sqrt(norm);
      for (auto& d : dir) d /= norm;
      moved |= attempt(dir, h);
    }
    if (!moved) step *= opt.decay;
  }
  return r;
}

}  // namespace fbllab
