#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "kdecay/sequences.hpp"

namespace kdecay::testing {

inline constexpr double pi = std::numbers::pi;

inline double rel_diff(complex a, complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Fixed-seed generator so every property test replays identically.
class Draw {
 public:
  explicit Draw(std::uint64_t seed = 20240611) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double angle() { return uniform(-pi, pi); }
  complex polar(double lo, double hi) { return std::polar(uniform(lo, hi), angle()); }
  complex unit_complex() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

  /// Terms whose poles have modulus in [lo, hi].
  std::vector<PoleTerm> terms(std::size_t n, double lo, double hi) {
    std::vector<PoleTerm> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({unit_complex(), polar(lo, hi)});
    return out;
  }

  /// Point with |z| <= radius at least `gap` away from every pole.
  template <class PoleDistance>
  complex point_away(double radius, double gap, PoleDistance dist) {
    for (;;) {
      const complex z = std::polar(radius * std::sqrt(uniform(0.0, 1.0)), angle());
      if (dist(z) >= gap) return z;
    }
  }

 private:
  std::mt19937_64 gen_;
};

/// Composite trapezoid on the circle, exponentially accurate for smooth periodic integrands.
template <class F>
double trapezoid(F f, double r, std::size_t n) {
  double sum = 0.0, c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = f(std::polar(r, 2.0 * pi * double(i) / double(n))) - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum * 2.0 * pi / double(n);
}

}  // namespace kdecay::testing
