#pragma once

#include <complex>

namespace kdecay {

using complex = std::complex<double>;

/// Value with an absolute error estimate.
struct SeriesValue {
  double value = 0.0;
  double error = 0.0;
};

/// Complex digamma by reflection, upward shift to Re z >= 10 and the
/// Bernoulli asymptotic series.
complex digamma(complex z);

/// Complex trigamma, same construction as digamma.
complex trigamma(complex z);

/// Hurwitz zeta sum_{k>=0} (q+k)^-s for real s > 1, q > 0 (Euler-Maclaurin).
SeriesValue hurwitz_zeta(double s, double q);

/// q^s * hurwitz_zeta(s, q); stays representable when the plain value underflows.
SeriesValue hurwitz_zeta_scaled(double s, double q);

/// Lerch transcendent Phi(1/2, s, a) = sum_{k>=0} 2^-k / (a+k)^s, s in {1, 2}.
complex lerch_phi_half(int s, complex a);

/// Closed forms of the classical kernel sums, indexed like the built-in families.
enum class ReferenceFamily { a, b, c, d, e, f };

struct ReferenceFunction {
  ReferenceFamily family = ReferenceFamily::a;
  int order = 1;  ///< 1: sum c/(z-t); 2: sum c/(z-t)^2
};

/// Distance from z to the nearest pole of the reference function.
double reference_pole_distance(ReferenceFamily family, complex z);

/// Evaluates the closed form. Throws Error(too_close_to_pole) within 1e-6 of a pole.
complex eval_reference(const ReferenceFunction& ref, complex z);

}  // namespace kdecay
