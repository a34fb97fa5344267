#include "kdecay/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "kdecay/error.hpp"

namespace kdecay {
namespace {

constexpr double pi = std::numbers::pi;
constexpr double egamma = std::numbers::egamma;

// B_{2k}, k = 1..10
constexpr std::array<double, 10> bernoulli_even = {
    1.0 / 6.0,        -1.0 / 30.0,   1.0 / 42.0,          -1.0 / 30.0,
    5.0 / 66.0,       -691.0 / 2730.0, 7.0 / 6.0,         -3617.0 / 510.0,
    43867.0 / 798.0,  -174611.0 / 330.0};

// B_{2k} / (2k)!, k = 1..10
constexpr std::array<double, 10> bernoulli_over_factorial = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0};

constexpr double shift_threshold = 10.0;

}  // namespace

complex digamma(complex z) {
  if (z.real() < 0.5) {
    return digamma(1.0 - z) - pi / std::tan(pi * z);
  }
  complex shift = 0.0;
  while (z.real() < shift_threshold) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  const complex w = 1.0 / z;
  const complex w2 = w * w;
  complex series = std::log(z) - 0.5 * w;
  complex power = w2;
  double previous = INFINITY;
  for (std::size_t k = 0; k < bernoulli_even.size(); ++k) {
    const complex term = bernoulli_even[k] / (2.0 * double(k + 1)) * power;
    const double mag = std::abs(term);
    if (mag > previous) break;
    series -= term;
    if (mag <= 1e-18 * std::abs(series)) break;
    previous = mag;
    power *= w2;
  }
  return shift + series;
}

complex trigamma(complex z) {
  if (z.real() < 0.5) {
    const complex s = std::sin(pi * z);
    return -trigamma(1.0 - z) + pi * pi / (s * s);
  }
  complex shift = 0.0;
  while (z.real() < shift_threshold) {
    shift += 1.0 / (z * z);
    z += 1.0;
  }
  const complex w = 1.0 / z;
  const complex w2 = w * w;
  complex series = w + 0.5 * w2;
  complex power = w2 * w;
  double previous = INFINITY;
  for (double b : bernoulli_even) {
    const complex term = b * power;
    const double mag = std::abs(term);
    if (mag > previous) break;
    series += term;
    if (mag <= 1e-18 * std::abs(series)) break;
    previous = mag;
    power *= w2;
  }
  return shift + series;
}

SeriesValue hurwitz_zeta_scaled(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "hurwitz_zeta needs s > 1 and q > 0");
  }
  // Shift so the Euler-Maclaurin remainder terms shrink geometrically.
  const double a_min = std::max(12.0, (s + 21.0) / pi);
  const int n_shift = q >= a_min ? 0 : static_cast<int>(std::ceil(a_min - q));
  double head = 0.0;
  double head_carry = 0.0;
  for (int k = n_shift - 1; k >= 0; --k) {
    const double term = std::exp(-s * std::log1p(k / q));
    const double t = head + term;
    head_carry += (head - t) + term;
    head = t;
  }
  const double a = q + n_shift;
  // (a/q)^-s
  const double ratio = n_shift == 0 ? 1.0 : std::exp(-s * std::log1p(n_shift / q));
  double tail = a / (s - 1.0) + 0.5;
  double rising = s;  // s (s+1) ... (s + 2j - 2)
  double inv_a_pow = 1.0 / a;
  double last = 0.0;
  for (std::size_t j = 0; j < bernoulli_over_factorial.size(); ++j) {
    const double term = bernoulli_over_factorial[j] * rising * inv_a_pow;
    tail += term;
    last = std::abs(term);
    rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
    inv_a_pow /= a * a;
  }
  SeriesValue out;
  out.value = head + head_carry + ratio * tail;
  // The remainder is bounded by the first omitted term; last retained term is a safe overestimate.
  out.error = ratio * last + 4.0 * std::numeric_limits<double>::epsilon() * out.value;
  return out;
}

SeriesValue hurwitz_zeta(double s, double q) {
  const SeriesValue scaled = hurwitz_zeta_scaled(s, q);
  const double factor = std::exp(-s * std::log(q));
  return {scaled.value * factor, scaled.error * factor};
}

complex lerch_phi_half(int s, complex a) {
  if (s != 1 && s != 2) {
    throw Error(ErrorCode::invalid_argument, "lerch_phi_half supports s = 1 or 2");
  }
  complex sum = 0.0;
  complex carry = 0.0;
  double weight = 1.0;
  const double amag = std::abs(a);
  for (int k = 0; k < 4000; ++k) {
    const complex d = a + double(k);
    const complex term = weight / (s == 1 ? d : d * d);
    const complex t = sum + term;
    carry += (sum - t) + term;
    sum = t;
    const double kk = double(k + 1);
    if (kk > amag + 1.0) {
      const double rest = weight / std::pow(kk - amag, s);
      if (rest <= 1e-18 * std::abs(sum)) break;
    }
    weight *= 0.5;
  }
  return sum + carry;
}

double reference_pole_distance(ReferenceFamily family, complex z) {
  const double x = z.real();
  const double y = z.imag();
  auto to_integer = [&](double n) { return std::hypot(x - n, y); };
  switch (family) {
    case ReferenceFamily::a:
      return to_integer(std::round(x));
    case ReferenceFamily::b: {
      const double n = std::round(x);
      if (n != 0.0) return to_integer(n);
      return std::min(to_integer(1.0), to_integer(-1.0));
    }
    case ReferenceFamily::c:
    case ReferenceFamily::d:
    case ReferenceFamily::f:
      return to_integer(std::max(1.0, std::round(x)));
    case ReferenceFamily::e: {
      const double root = x > 0.0 ? std::floor(std::sqrt(x)) : 0.0;
      double best = INFINITY;
      for (double n = std::max(1.0, root - 1.0); n <= root + 2.0; n += 1.0) {
        best = std::min(best, to_integer(n * n));
      }
      return best;
    }
  }
  return INFINITY;
}

complex eval_reference(const ReferenceFunction& ref, complex z) {
  if (ref.order != 1 && ref.order != 2) {
    throw Error(ErrorCode::invalid_argument, "reference order must be 1 or 2");
  }
  if (reference_pole_distance(ref.family, z) < 1e-6) {
    throw Error(ErrorCode::too_close_to_pole, "reference evaluation");
  }
  const bool first = ref.order == 1;
  switch (ref.family) {
    case ReferenceFamily::a: {
      const complex s = std::sin(pi * z);
      if (first) return pi / s;
      return pi * pi * std::cos(pi * z) / (s * s);
    }
    case ReferenceFamily::b: {
      const complex s = std::sin(pi * z);
      if (first) return pi / (z * s) - 1.0 / (z * z);
      return pi / (z * z * s) + pi * pi * std::cos(pi * z) / (z * s * s) - 2.0 / (z * z * z);
    }
    case ReferenceFamily::c: {
      const complex g = egamma + digamma(1.0 - z);
      if (first) return g / z;
      return trigamma(1.0 - z) / z + g / (z * z);
    }
    case ReferenceFamily::d: {
      const double zeta2 = pi * pi / 6.0;
      const complex g = egamma + digamma(1.0 - z);
      const complex z2 = z * z;
      if (first) return zeta2 / z + g / z2;
      return zeta2 / z2 + trigamma(1.0 - z) / z2 + 2.0 * g / (z2 * z);
    }
    case ReferenceFamily::e: {
      const complex w = std::sqrt(z);
      const complex cot = 1.0 / std::tan(pi * w);
      const complex main = pi * w * cot;
      if (first) return (main - 1.0) / (2.0 * z);
      const complex s = std::sin(pi * w);
      const complex dmain_dw = pi * cot - pi * pi * w / (s * s);
      const complex derivative = dmain_dw / (4.0 * w * z) - (main - 1.0) / (2.0 * z * z);
      return -derivative;
    }
    case ReferenceFamily::f: {
      if (first) return -(lerch_phi_half(1, -z) * z + 1.0) / z;
      return lerch_phi_half(2, -z) - 1.0 / (z * z);
    }
  }
  return 0.0;
}

}  // namespace kdecay
