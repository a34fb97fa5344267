#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kdecay/circle.hpp"
#include "kdecay/sequences.hpp"

namespace kdecay {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::uint64_t evaluations = 0;
  std::vector<double> flagged_singular_angles;  ///< radians in [0, 2pi)
  bool converged = true;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-9;
  std::uint64_t max_evaluations = 2'000'000;
  int singular_levels = 60;          ///< graded levels toward an on-circle pole
  std::size_t max_breakpoints = 512;  ///< strongest poles kept as breakpoints
};

/// Integrand of a circle integral, applied to |f|.
struct Feature {
  enum class Kind { abs_power, ln_plus, ln_plus_unit_floor };
  Kind kind = Kind::abs_power;
  double p = 1.0;  ///< exponent for abs_power, kernel order for breakpoint grading otherwise

  static Feature power(double p) { return {Kind::abs_power, p}; }
  /// max(0, ln|f|)
  static Feature ln_plus() { return {Kind::ln_plus, 0.0}; }
  /// max(1, ln|f|)
  static Feature ln_plus_unit_floor() { return {Kind::ln_plus_unit_floor, 0.0}; }

  double operator()(double modulus) const;
};

/// A pole of the integrand near the circle: refinement is anchored there.
struct Breakpoint {
  complex pole;
  double strength = 1.0;  ///< |weight|; ranks breakpoints when there are too many
};

/// Poles with ||t| - r| < r/4 whose distance to the circle is small against the
/// initial mesh.
std::vector<Breakpoint> pole_breakpoints(std::span<const PoleTerm> terms, double r);

/// Several integrals over the same circle sharing every function evaluation.
std::vector<QuadratureResult> circle_integrals(const CircleFunction& f, double r,
                                               std::span<const Feature> features,
                                               std::span<const Breakpoint> breakpoints,
                                               const QuadratureOptions& options = {});

/// integral over [0, 2pi) of |f(r e^{i phi})|^p.
QuadratureResult circle_abs_power(const CircleFunction& f, double r, double p,
                                  std::span<const Breakpoint> breakpoints = {},
                                  const QuadratureOptions& options = {});

/// integral over [0, 2pi) of max(0, ln|f(r e^{i phi})|); `unit_floor` switches to max(1, ln).
QuadratureResult circle_ln_plus(const CircleFunction& f, double r,
                                std::span<const Breakpoint> breakpoints = {},
                                const QuadratureOptions& options = {}, bool unit_floor = false);

struct SuperlevelResult {
  double measure = 0.0;   ///< radians
  double error = 0.0;     ///< sum of residual bracket widths
  double good_sup = 0.0;  ///< max |f| over samples with |f| <= lambda
  std::size_t crossings = 0;
};

/// Measure of {phi : |f(r e^{i phi})| > lambda} from a uniform grid plus seeds
/// at the breakpoints, with bisection on every indicator change.
SuperlevelResult superlevel_measure(const CircleFunction& f, double r, double lambda, std::size_t grid,
                                    std::span<const Breakpoint> breakpoints = {});

struct NudgedRadius {
  double radius = 0.0;
  double pole_gap = 0.0;  ///< distance from the circle to the nearest pole modulus
};

/// Moves r within +-window*r to maximise the gap to the given pole moduli.
NudgedRadius nudge_radius(double r, std::span<const double> moduli, double window = 0.01);

}  // namespace kdecay
