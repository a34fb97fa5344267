#include <doctest.h>

#include "kdecay/averaging.hpp"
#include "kdecay/kernels.hpp"
#include "test_support.hpp"

using namespace kdecay;
using kdecay::testing::Draw;
using kdecay::testing::pi;

TEST_SUITE("averaging operator") {
  TEST_CASE("branch convention") {
    CHECK(std::abs(sqrt_branch(4.0) - 2.0) < 1e-15);
    CHECK(std::abs(sqrt_branch(-4.0) - complex(0, 2)) < 1e-15);
    // theta = 3pi/2 maps to 3pi/4, not the principal -pi/4
    CHECK(std::abs(sqrt_branch(complex(0, -1)) - std::polar(1.0, 0.75 * pi)) < 1e-15);
    CHECK(std::abs(sqrt_branch(complex(0, 2)) - complex(1, 1)) < 1e-15);
  }

  TEST_CASE("documented values") {
    CHECK(apply_J([](complex) { return complex(3.0, -1.0); }, complex(2.0, 5.0)) == complex(0.0));
    const complex v = apply_J([](complex w) { return 1.0 / ((w - 4.0) * (w - 4.0)); }, 9.0);
    CHECK(std::abs(v - 4.0 / 49.0) < 1e-16);
    CHECK(std::abs(v - 4.0 / ((9.0 - 16.0) * (9.0 - 16.0))) < 1e-16);
    Draw draw(51);
    for (int i = 0; i < 100; ++i) {
      const complex z = draw.polar(1e-3, 1e3);
      CHECK(std::abs(apply_J([](complex w) { return w; }, z) - 0.5) < 1e-15);
    }
  }

  TEST_CASE("linearity") {
    Draw draw(52);
    auto f = [](complex w) { return 1.0 / ((w - complex(3, 1)) * (w - complex(3, 1))); };
    auto g = [](complex w) { return std::exp(w) / (w + 7.0); };
    for (int i = 0; i < 200; ++i) {
      const complex a = draw.unit_complex(), b = draw.unit_complex();
      const complex z = draw.polar(0.1, 20.0);
      const complex lhs = apply_J([&](complex w) { return a * f(w) + b * g(w); }, z);
      const complex rhs = a * apply_J(f, z) + b * apply_J(g, z);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }

  TEST_CASE("averaged circle function evaluates J") {
    const CircleFunction f = plain_function([](complex w) { return 1.0 / ((w - 5.0) * (w - 5.0)); });
    const CircleFunction jf = averaged(f);
    for (const complex z : {complex(2, 3), complex(-7, 0.5), complex(0, -1)}) {
      const complex expected = apply_J([](complex w) { return 1.0 / ((w - 5.0) * (w - 5.0)); }, z);
      CHECK(std::abs(jf(CirclePoint::at(z)).value - expected) < 1e-15);
    }
  }
}

TEST_SUITE("J on kernel sums") {
  TEST_CASE("single-term identities") {
    const auto four = SequenceFamily::single(1.0, 4.0);
    const std::vector<complex> at_nine{9.0};
    CHECK(J_identity_check(four, at_nine, 1e-14).holds);

    // c=1, t=-1, z=2i; sqrt_branch(2i) = 1+i
    const complex z(0, 2), s(1, 1);
    const complex lhs = (1.0 / ((s + 1.0) * (s + 1.0)) - 1.0 / ((-s + 1.0) * (-s + 1.0))) / (4.0 * s);
    const complex rhs = -1.0 / ((z - 1.0) * (z - 1.0));
    CHECK(std::abs(lhs - rhs) < 1e-15);
    const std::vector<complex> at_2i{z};
    const auto rep = J_identity_check(SequenceFamily::single(1.0, -1.0), at_2i, 1e-14);
    CHECK(rep.holds);
    CHECK(rep.max_deviation < 1e-15);
  }

  TEST_CASE("squares truncated to 50 terms at 20 samples") {
    std::vector<PoleTerm> terms;
    for (int n = 1; n <= 50; ++n) terms.push_back({1.0, double(n) * n});
    const auto fam = SequenceFamily::from_terms(terms);
    Draw draw(53);
    std::vector<complex> samples;
    while (samples.size() < 20) {
      const complex z = draw.polar(0.5, 2000.0);
      bool ok = true;
      for (const auto& t : terms) ok = ok && std::abs(z - t.pole) > 0.5 && std::abs(z - t.pole * t.pole) > 0.5;
      if (ok) samples.push_back(z);
    }
    CHECK(J_identity_check(fam, samples, 1e-10).holds);
  }

  TEST_CASE("random single terms far and near") {
    Draw draw(54);
    for (int i = 0; i < 300; ++i) {
      const complex t = draw.polar(0.01, 1e3);
      const complex c = draw.unit_complex();
      const complex z = draw.polar(1e-2, 1e6);
      if (std::abs(z - t * t) < 1e-3 * std::max(1.0, std::abs(z)) ||
          std::abs(sqrt_branch(z) - t) < 1e-3 || std::abs(sqrt_branch(z) + t) < 1e-3)
        continue;
      const std::vector<complex> at{z};
      const auto rep = J_identity_check(SequenceFamily::single(c, t), at, 1e-10);
      const double scale = std::abs(c * t) / std::norm(z - t * t);
      CAPTURE(z);
      CAPTURE(t);
      CHECK(rep.max_deviation <= 1e-10 * std::max(1.0, scale));
    }
  }

  TEST_CASE("J of the sqrt-transformed band is the original band") {
    const auto fam = SequenceFamily::reciprocal(1.0);
    const double r = 100.0;
    const auto band = SequenceFamily::from_terms(fam.enumerate(middle_range(r)));
    const auto roots = transform_sqrt(band).enumerate(ModulusRange::everything());
    Draw draw(55);
    for (int i = 0; i < 50; ++i) {
      const complex z = std::polar(r, draw.angle());
      const complex lhs = apply_J([&](complex w) { return eval_partial(roots, w, 2); }, z);
      const complex rhs = eval_partial(band.enumerate(ModulusRange::everything()), z, 2);
      CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1e-12, std::abs(rhs)) + 1e-13);
    }
  }
}

TEST_SUITE("boundedness") {
  TEST_CASE("constant function") {
    const auto rec = J_boundedness_check(plain_function([](complex) { return complex(2.0); }), {}, 9.0, 0.3, 1e-10);
    CHECK(rec.lhs == 0.0);
    CHECK(rec.holds);
  }

  TEST_CASE("identity function at r = 4, p = 0.3") {
    const auto rec = J_boundedness_check(plain_function([](complex w) { return w; }), {}, 4.0, 0.3, 1e-10);
    // J(w) = 1/2 everywhere
    CHECK(rec.lhs == doctest::Approx(2.0 * pi * std::pow(2.0, -0.3)).epsilon(1e-12));
    CHECK(rec.rhs == doctest::Approx(std::pow(2.0, 0.4) / std::pow(4.0, 0.15) * 2.0 * pi * std::pow(2.0, 0.3))
                         .epsilon(1e-12));
    CHECK(rec.holds);
    CHECK(rec.ratio == doctest::Approx(rec.lhs / rec.rhs));
  }

  TEST_CASE("middle band of the reciprocal family at r = 100") {
    const auto fam = SequenceFamily::reciprocal(1.0);
    const auto terms = fam.enumerate(middle_range(100.0));
    std::vector<Breakpoint> poles;
    for (const auto& t : terms) poles.push_back({t.pole, std::abs(t.weight)});
    const KernelField field(terms, 2);
    for (double p : {0.1, 0.3}) {
      const auto rec = J_boundedness_check(field.function(), poles, 100.0, p, 1e-9);
      CAPTURE(p);
      CHECK(rec.holds);
      CHECK(rec.ratio <= 1.0);
    }
  }
}
