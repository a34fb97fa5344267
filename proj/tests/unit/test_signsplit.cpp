#include <doctest.h>

#include "kdecay/error.hpp"
#include "kdecay/kernels.hpp"
#include "kdecay/signsplit.hpp"
#include "test_support.hpp"

using namespace kdecay;
using kdecay::testing::Draw;
using kdecay::testing::pi;

namespace {

std::vector<PoleTerm> tail_terms(Draw& draw, std::size_t n, double r) {
  std::vector<PoleTerm> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({draw.unit_complex(), std::polar(r * std::sqrt(2.0) * draw.uniform(1.0 + 1e-9, 4.0), draw.angle())});
  }
  return out;
}

std::vector<PoleTerm> start_terms(Draw& draw, std::size_t n, double r) {
  std::vector<PoleTerm> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({draw.unit_complex(), std::polar(r / std::sqrt(2.0) * draw.uniform(0.0, 1.0 - 1e-9), draw.angle())});
  }
  return out;
}

std::size_t nonempty(const std::array<SignSplitPart, 4>& parts) {
  return static_cast<std::size_t>(
      std::count_if(parts.begin(), parts.end(), [](const SignSplitPart& p) { return !p.terms.empty(); }));
}

complex sum_parts(const std::array<SignSplitPart, 4>& parts, complex z) {
  complex s = 0.0;
  for (const auto& p : parts) s += p.evaluate(z);
  return s;
}

}  // namespace

TEST_SUITE("tail split") {
  TEST_CASE("single real term lands in the first part") {
    const std::vector<PoleTerm> one{{1.0, 20.0}};
    const auto parts = split_tail(one, 10.0);
    CHECK(parts[0].label == "F1");
    CHECK(parts[0].terms.size() == 1);
    CHECK(nonempty(parts) == 1);
    CHECK(std::abs(parts[0].evaluate(3.0) - 1.0 / 289.0) < 1e-17);
  }

  TEST_CASE("imaginary weight on a real pole lands in the third part only") {
    const std::vector<PoleTerm> one{{complex(0, 1), 20.0}};
    const auto parts = split_tail(one, 10.0);
    CHECK(nonempty(parts) == 1);
    CHECK(parts[2].terms.size() == 1);
    CHECK(parts[2].label == "F3");
  }

  TEST_CASE("parts reproduce the partial sum") {
    Draw draw(41);
    for (int trial = 0; trial < 20; ++trial) {
      const double r = draw.uniform(1.0, 1000.0);
      const auto terms = tail_terms(draw, 50, r);
      const auto parts = split_tail(terms, r);
      for (const complex z : {0.3 * r * std::exp(complex(0, 1)), complex(0.0), 0.99 * std::polar(r, draw.angle())}) {
        const complex direct = eval_partial(terms, z, 2);
        double scale = 0.0;  // sum of moduli: the size rounding acts on
        for (const auto& t : terms) scale += std::abs(t.weight) / std::norm(z - t.pole);
        CHECK(std::abs(sum_parts(parts, z) - direct) <= 1e-12 * scale);
      }
      for (const auto& p : parts) {
        if (!p.terms.empty()) CHECK(p.min_pole_distance() > 0.0);
      }
    }
  }

  TEST_CASE("pole inside the threshold is refused") {
    const std::vector<PoleTerm> bad{{1.0, 14.0}};
    CHECK_THROWS_WITH_AS(split_tail(bad, 10.0), doctest::Contains("term inside threshold"), Error);
  }
}

TEST_SUITE("reflected start split") {
  TEST_CASE("origin terms give constants of either sign") {
    const double r = 4.0;
    const auto pos = split_start_reflected(std::vector<PoleTerm>{{1.0, 0.0}}, r);
    CHECK(pos[0].label == "G1");
    CHECK(nonempty(pos) == 1);
    CHECK(std::abs(pos[0].evaluate(complex(1.0, 2.0)) - 1.0 / (r * r)) < 1e-16);

    const auto neg = split_start_reflected(std::vector<PoleTerm>{{-1.0, 0.0}}, r);
    CHECK(nonempty(neg) == 1);
    CHECK(neg[1].label == "G2");
    CHECK(neg[1].evaluate(0.5).real() == doctest::Approx(-1.0 / (r * r)));
  }

  TEST_CASE("reflection keeps the modulus on the circle") {
    Draw draw(42);
    for (int trial = 0; trial < 10; ++trial) {
      const double r = draw.uniform(1.0, 500.0);
      const auto terms = start_terms(draw, 20, r);
      const auto parts = split_start_reflected(terms, r);
      for (int k = 0; k < 64; ++k) {
        const complex z = std::polar(r, 2.0 * pi * k / 64.0);
        const double lhs = std::abs(sum_parts(parts, z));
        const double rhs = std::abs(eval_partial(terms, z, 2));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
      }
    }
  }

  TEST_CASE("parts reproduce the reflected sum inside the disk") {
    Draw draw(43);
    const double r = 30.0;
    const auto terms = start_terms(draw, 40, r);
    const auto parts = split_start_reflected(terms, r);
    for (int i = 0; i < 50; ++i) {
      const complex z = draw.polar(0.0, r);
      complex direct = 0.0;
      for (const auto& t : terms) {
        const complex d = r * r - z * std::conj(t.pole);
        direct += std::conj(t.weight) * r * r / (d * d);
      }
      CHECK(std::abs(sum_parts(parts, z) - direct) <= 1e-12 * std::abs(direct) + 1e-15);
    }
  }

  TEST_CASE("pole outside the threshold is refused") {
    const std::vector<PoleTerm> bad{{1.0, 8.0}};
    CHECK_THROWS_WITH_AS(split_start_reflected(bad, 10.0), doctest::Contains("term outside threshold"), Error);
  }
}

TEST_SUITE("half-plane predicates") {
  TEST_CASE("documented configurations") {
    CHECK(halfplane_tail_predicate(0.0, complex(-30.0, 2.0), 10.0));
    CHECK(halfplane_tail_predicate(6.9, 10.0, 7.0));
    const double r = 7.0;
    const complex t = r * std::sqrt(2.0) * (1.0 + 1e-6);
    CHECK(halfplane_tail_predicate(std::polar(r * (1.0 - 1e-6), pi / 4.0), t, r));
    CHECK(halfplane_start_predicate(0.0, complex(1.0, 3.0), 10.0));
    CHECK(halfplane_start_predicate(complex(9.0, 4.0), 0.0, 10.0));
  }

  TEST_CASE("start predicate on the boundary grid") {
    const double r = 3.0;
    for (int i = 0; i < 100; ++i) {
      for (int j = 0; j < 100; ++j) {
        const complex t = std::polar(r / std::sqrt(2.0) * (1.0 - 1e-6), 2.0 * pi * i / 100.0);
        const complex z = std::polar(r * (1.0 - 1e-6), 2.0 * pi * j / 100.0);
        CHECK(halfplane_start_predicate(z, t, r));
      }
    }
  }

  TEST_CASE("sampled universality") {
    Draw draw(44);
    std::size_t tail_false = 0, start_false = 0;
    for (int i = 0; i < 100'000; ++i) {
      const double r = std::exp(draw.uniform(-5.0, 10.0));
      const complex z = std::polar(r * std::sqrt(draw.uniform(0.0, 1.0)) * (1.0 - 1e-12), draw.angle());
      const complex tt = std::polar(r * std::sqrt(2.0) * (1.0 + 1e-12) * std::exp(draw.uniform(0.0, 3.0)), draw.angle());
      const complex ts = std::polar(r / std::sqrt(2.0) * (1.0 - 1e-12) * draw.uniform(0.0, 1.0), draw.angle());
      tail_false += !halfplane_tail_predicate(z, tt, r);
      start_false += !halfplane_start_predicate(z, ts, r);
    }
    CHECK(tail_false == 0);
    CHECK(start_false == 0);
  }

  TEST_CASE("every constructed part keeps its sign claim on disk samples") {
    Draw draw(45);
    const double r = 12.0;
    const auto tails = split_tail(tail_terms(draw, 30, r), r);
    const auto starts = split_start_reflected(start_terms(draw, 30, r), r);
    const auto samples = disk_samples(r, 1000);
    CHECK(samples.size() == 1000);
    for (const auto* parts : {&tails, &starts}) {
      for (const auto& part : *parts) {
        for (const complex z : samples) {
          CHECK(std::abs(z) < r);
          if (!part.terms.empty()) CHECK(part.satisfies_claim(part.evaluate(z)));
        }
      }
    }
  }
}

TEST_SUITE("Smirnov inequality") {
  TEST_CASE("constant part") {
    SignSplitPart part;
    part.label = "G1";
    part.source = SplitSource::start;
    part.terms = {{16.0, 0.0}};
    part.radius = 4.0;
    const auto rec = smirnov_verify(part, 0.3, 1e-10);
    CHECK(rec.lhs == doctest::Approx(2.0 * pi).epsilon(1e-12));
    CHECK(rec.rhs == doctest::Approx(2.0 * pi / std::cos(0.15 * pi)).epsilon(1e-14));
    CHECK(rec.holds);
  }

  TEST_CASE("single double pole at twice the radius") {
    const double r = 5.0, t = 2.0 * r;
    const auto parts = split_tail(std::vector<PoleTerm>{{1.0, t}}, r);
    const auto rec = smirnov_verify(parts[0], 0.3, 1e-10);
    CHECK(rec.rhs == doctest::Approx(2.0 * pi / std::cos(0.15 * pi) * std::pow(t, -0.6)).epsilon(1e-13));
    CHECK(rec.holds);
    CHECK(rec.lhs < rec.rhs);
  }

  TEST_CASE("every part of random configurations across p") {
    Draw draw(46);
    const double r = 20.0;
    const auto tails = split_tail(tail_terms(draw, 30, r), r);
    const auto starts = split_start_reflected(start_terms(draw, 30, r), r);
    for (double p : {0.1, 0.25, 0.4, 0.45}) {
      for (const auto* parts : {&tails, &starts}) {
        for (const auto& part : *parts) {
          if (part.terms.empty()) continue;
          const auto rec = smirnov_verify(part, p, 1e-9);
          CAPTURE(part.label);
          CAPTURE(p);
          CHECK(rec.holds);
          CHECK(rec.lhs - rec.lhs_error <= rec.rhs);
        }
      }
    }
  }

  TEST_CASE("a mislabelled part is caught with a witness") {
    SignSplitPart part;
    part.label = "F1";
    part.source = SplitSource::tail;
    part.terms = {{-1.0, 30.0}};
    part.claim = SignClaim::re_positive;
    part.radius = 10.0;
    CHECK_THROWS_WITH_AS(smirnov_verify(part, 0.25, 1e-9), doctest::Contains("sign claim violated at sample point"),
                         Error);
  }
}
