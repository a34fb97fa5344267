#include <doctest.h>

#include "kdecay/error.hpp"
#include "kdecay/special.hpp"
#include "test_support.hpp"

using namespace kdecay;
using kdecay::testing::Draw;
using kdecay::testing::pi;

namespace {

constexpr double euler_gamma = 0.57721566490153286061;

/// Compensated accumulation for the brute-force oracles below.
struct Kahan {
  complex sum{0.0}, c{0.0};
  void add(complex x) {
    const complex y = x - c;
    const complex t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

/// Series straight from the definition of each family, with an explicit tail correction.
complex brute_force(ReferenceFamily f, complex z) {
  Kahan k;
  switch (f) {
    case ReferenceFamily::a:    // t = +-n, c = (-1)^n; pairs give 2z(-1)^n/(z^2-n^2)
    case ReferenceFamily::b: {  // t = +-n (n != 0), c = (-1)^n / n; pairs give 2(-1)^n/(z^2-n^2)
      constexpr long N = 200000;
      auto pair = [&](long n) {
        const complex num = f == ReferenceFamily::a ? 2.0 * z : complex(2.0);
        return (n % 2 ? -1.0 : 1.0) * num / (z * z - double(n) * double(n));
      };
      if (f == ReferenceFamily::a) k.add(1.0 / z);
      for (long n = N; n >= 1; --n) k.add(pair(n));
      k.add(0.5 * pair(N + 1));  // mean of consecutive partial sums of an alternating series
      return k.sum;
    }
    case ReferenceFamily::c: {  // t = n, c = 1/n
      constexpr long N = 2'000'000;
      for (long n = N; n >= 1; --n) k.add(1.0 / (double(n) * (z - double(n))));
      // sum_{n>N} 1/(n(z-n)) = -sum 1/n^2 (1 + z/n + ...)
      const double M = double(N) + 0.5;
      k.add(-1.0 / M - z / (2.0 * M * M));
      return k.sum;
    }
    case ReferenceFamily::d: {  // t = n, c = 1/n^2
      constexpr long N = 2'000'000;
      for (long n = N; n >= 1; --n) k.add(1.0 / (double(n) * double(n) * (z - double(n))));
      const double M = double(N) + 0.5;
      k.add(-1.0 / (2.0 * M * M));
      return k.sum;
    }
    case ReferenceFamily::e: {  // t = n^2, c = 1
      constexpr long N = 2'000'000;
      for (long n = N; n >= 1; --n) k.add(1.0 / (z - double(n) * double(n)));
      const double M = double(N) + 0.5;
      k.add(-1.0 / M - z / (3.0 * M * M * M));
      return k.sum;
    }
    case ReferenceFamily::f: {  // t = n, c = 2^-n
      for (int n = 80; n >= 1; --n) k.add(std::ldexp(1.0, -n) / (z - double(n)));
      return k.sum;
    }
  }
  return 0.0;
}

const ReferenceFamily all_refs[] = {ReferenceFamily::a, ReferenceFamily::b, ReferenceFamily::c,
                                    ReferenceFamily::d, ReferenceFamily::e, ReferenceFamily::f};

}  // namespace

TEST_SUITE("digamma and friends") {
  TEST_CASE("known values") {
    CHECK(std::abs(digamma(1.0) + euler_gamma) < 1e-15);
    CHECK(std::abs(digamma(0.5) + euler_gamma + 2.0 * std::log(2.0)) < 1e-14);
    CHECK(std::abs(trigamma(1.0) - pi * pi / 6.0) < 1e-14);
    CHECK(std::abs(trigamma(0.5) - pi * pi / 2.0) < 1e-13);
    CHECK(std::abs(digamma(complex(0, 1)) - complex(0.09465032062247697, 2.0766740474685811)) < 1e-14);
  }

  TEST_CASE("shift recurrences hold across the plane") {
    Draw draw(11);
    for (int i = 0; i < 400; ++i) {
      const complex z = draw.polar(0.05, 60.0);
      if (std::abs(z - std::round(z.real())) < 0.05 && z.real() <= 0.5) continue;
      const complex lhs = digamma(z + 1.0);
      const complex rhs = digamma(z) + 1.0 / z;
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
      const complex tl = trigamma(z + 1.0);
      const complex tr = trigamma(z) - 1.0 / (z * z);
      CHECK(std::abs(tl - tr) <= 1e-12 * std::max(1.0, std::abs(tl)));
    }
  }

  TEST_CASE("reflection: psi(1-z) - psi(z) = pi cot(pi z)") {
    Draw draw(12);
    for (int i = 0; i < 200; ++i) {
      const complex z = draw.polar(0.1, 20.0);
      if (std::abs(z - std::round(z.real())) < 0.1) continue;
      const complex lhs = digamma(1.0 - z) - digamma(z);
      const complex rhs = pi / std::tan(pi * z);
      CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(rhs)));
    }
  }

  TEST_CASE("Hurwitz zeta") {
    CHECK(hurwitz_zeta(2.0, 1.0).value == doctest::Approx(pi * pi / 6.0).epsilon(1e-15));
    CHECK(hurwitz_zeta(3.0, 1.0).value == doctest::Approx(1.2020569031595942).epsilon(1e-15));
    CHECK(hurwitz_zeta(2.0, 1.0).error < 1e-14);
    // zeta(s, q) = q^-s + zeta(s, q+1)
    for (double q : {0.3, 2.5, 17.0, 1e4}) {
      const double lhs = hurwitz_zeta(1.5, q).value;
      const double rhs = std::pow(q, -1.5) + hurwitz_zeta(1.5, q + 1.0).value;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
      CHECK(hurwitz_zeta_scaled(1.5, q).value == doctest::Approx(std::pow(q, 1.5) * lhs).epsilon(1e-13));
    }
  }

  TEST_CASE("Lerch Phi(1/2, s, a) satisfies its shift recurrence") {
    Draw draw(13);
    for (int i = 0; i < 100; ++i) {
      const complex a = draw.polar(0.3, 40.0);
      for (int s : {1, 2}) {
        const complex lhs = lerch_phi_half(s, a);
        const complex rhs = 1.0 / std::pow(a, s) + 0.5 * lerch_phi_half(s, a + 1.0);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(lhs)));
      }
    }
    CHECK(std::abs(lerch_phi_half(1, 1.0) - 2.0 * std::log(2.0)) < 1e-15);
  }
}

TEST_SUITE("closed forms") {
  TEST_CASE("identity points") {
    CHECK(std::abs(eval_reference({ReferenceFamily::a, 1}, 0.5) - pi) < 1e-15);
    CHECK(std::abs(eval_reference({ReferenceFamily::a, 2}, 0.5)) < 1e-15);
    CHECK(std::abs(eval_reference({ReferenceFamily::a, 2}, 0.25) - pi * pi * std::sqrt(2.0)) < 1e-13);
  }

  TEST_CASE("family f at z = -1 against the direct geometric series") {
    const complex ref = eval_reference({ReferenceFamily::f, 1}, -1.0);
    double direct = 0.0;
    for (int n = 60; n >= 1; --n) direct += std::ldexp(1.0, -n) / (-1.0 - n);
    CHECK(std::abs(ref - direct) < 1e-15);
  }

  TEST_CASE("first-order closed forms match their defining series") {
    Draw draw(14);
    for (auto f : all_refs) {
      for (int i = 0; i < 8; ++i) {
        const complex z = draw.point_away(12.0, 0.2, [f](complex w) { return reference_pole_distance(f, w); });
        const complex ref = eval_reference({f, 1}, z);
        const complex series = brute_force(f, z);
        CAPTURE(static_cast<int>(f));
        CAPTURE(z);
        CHECK(std::abs(ref - series) <= 1e-9 * std::max(1.0, std::abs(ref)));
      }
    }
  }

  TEST_CASE("second-order closed forms are the negated derivatives") {
    Draw draw(15);
    for (auto f : all_refs) {
      for (int i = 0; i < 20; ++i) {
        const complex z = draw.point_away(40.0, 0.2, [f](complex w) { return reference_pole_distance(f, w); });
        const double h = 1e-3 * std::min(1.0, reference_pole_distance(f, z));
        // five-point stencil: O(h^4)
        auto K1 = [f](complex w) { return eval_reference({f, 1}, w); };
        const complex d = (-K1(z + 2.0 * h) + 8.0 * K1(z + h) - 8.0 * K1(z - h) + K1(z - 2.0 * h)) / (12.0 * h);
        const complex ref = eval_reference({f, 2}, z);
        CAPTURE(static_cast<int>(f));
        CAPTURE(z);
        CHECK(std::abs(ref + d) <= 1e-7 * std::max(1.0, std::abs(ref)));
      }
    }
  }

  TEST_CASE("pi/sin(pi z) has residue (-1)^n at n = 0, 1, 2") {
    for (int n = 0; n <= 2; ++n) {
      // (1/2 pi i) contour integral over |z - n| = 0.25 by the periodic trapezoid rule
      constexpr int M = 256;
      complex acc = 0.0;
      for (int j = 0; j < M; ++j) {
        const complex w = std::polar(0.25, 2.0 * pi * j / M);
        acc += eval_reference({ReferenceFamily::a, 1}, double(n) + w) * w;
      }
      const complex residue = acc / double(M);
      CHECK(std::abs(residue - (n % 2 ? -1.0 : 1.0)) < 1e-13);
    }
  }

  TEST_CASE("closed forms refuse points next to a pole") {
    CHECK_THROWS_WITH_AS(eval_reference({ReferenceFamily::a, 1}, 3.0 + 1e-8), doctest::Contains("too close to pole"),
                         Error);
    CHECK_THROWS_AS(eval_reference({ReferenceFamily::e, 2}, complex(16.0, 1e-9)), Error);
    CHECK_NOTHROW(eval_reference({ReferenceFamily::c, 1}, 0.0));  // the origin carries no pole for c
  }
}

TEST_CASE("fourth classical identity: pi^2/(6z) settles the suspected misprint") {
  // sum_{n>=1} 1/(n^2 (z-n)) summed over 1e7 terms plus tail against both candidate closed forms.
  const complex points[] = {0.5, complex(-2.5, 1.0), complex(3.3, -0.7), 7.5};
  for (const complex z : points) {
    Kahan k;
    constexpr long N = 10'000'000;
    for (long n = N; n >= 1; --n) k.add(1.0 / (double(n) * double(n) * (z - double(n))));
    // |tail| <= sum_{n>N} 1/(n^2 (n-|z|)) < 1/((N-|z|) N); its leading term is -1/(2N^2)
    const double M = double(N) + 0.5;
    const complex series = k.sum - 1.0 / (2.0 * M * M);
    const double tail_bound = 1.0 / ((double(N) - std::abs(z)) * double(N));
    const complex g = euler_gamma + digamma(1.0 - z);
    const complex corrected = pi * pi / (6.0 * z) + g / (z * z);
    const complex as_printed = pi * pi / 6.0 + g / (z * z);
    CAPTURE(z);
    CHECK(std::abs(series - corrected) < 1e-12 + tail_bound * 1e-6);
    CHECK(std::abs(series - as_printed) > 0.1);
    CHECK(std::abs(eval_reference({ReferenceFamily::d, 1}, z) - corrected) < 1e-13);
  }
}
