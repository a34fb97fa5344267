#pragma once

#include <complex>
#include <functional>

namespace kdecay {

using complex = std::complex<double>;

/// A point z = anchor + offset. Quadrature anchors points near singular
/// angles so that z - t keeps full relative accuracy when t is close to anchor.
struct CirclePoint {
  complex anchor;
  complex offset;

  complex z() const noexcept { return anchor + offset; }
  static CirclePoint at(complex z) noexcept { return {z, 0.0}; }
};

/// Function value plus a bound on its evaluation (truncation) error.
struct KernelSample {
  complex value;
  double bound = 0.0;
};

using CircleFunction = std::function<KernelSample(const CirclePoint&)>;

/// Wraps an exactly evaluated function of z.
inline CircleFunction plain_function(std::function<complex(complex)> f) {
  return [f = std::move(f)](const CirclePoint& p) { return KernelSample{f(p.z()), 0.0}; };
}

}  // namespace kdecay
