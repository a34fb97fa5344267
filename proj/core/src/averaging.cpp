#include "kdecay/averaging.hpp"

#include <cmath>
#include <numbers>

#include "kdecay/error.hpp"
#include "kdecay/kernels.hpp"

namespace kdecay {

complex sqrt_branch(complex z) {
  double theta = std::arg(z);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  return std::polar(std::sqrt(std::abs(z)), 0.5 * theta);
}

complex apply_J(const std::function<complex(complex)>& f, complex z) {
  if (z == complex(0.0)) throw Error(ErrorCode::invalid_argument, "J is undefined at 0");
  const complex s = sqrt_branch(z);
  return (f(s) - f(-s)) / (4.0 * s);
}

CircleFunction averaged(CircleFunction f) {
  return [f = std::move(f)](const CirclePoint& p) {
    const complex z = p.z();
    if (z == complex(0.0)) throw Error(ErrorCode::invalid_argument, "J is undefined at 0");
    const complex sa = sqrt_branch(p.anchor);
    complex sz = sqrt_branch(z);
    // J is even in the choice of root; take the one near the anchor's root
    if (std::abs(sz - sa) > std::abs(sz + sa)) sz = -sz;
    const complex ds = p.offset == complex(0.0) ? complex(0.0) : p.offset / (sz + sa);
    const complex s = sa + ds;
    const KernelSample plus = f(CirclePoint{sa, ds});
    const KernelSample minus = f(CirclePoint{-sa, -ds});
    const double scale = 4.0 * std::abs(s);
    return KernelSample{(plus.value - minus.value) / (4.0 * s), (plus.bound + minus.bound) / scale};
  };
}

JIdentityReport J_identity_check(const SequenceFamily& family, std::span<const complex> samples, double tol,
                                 double kernel_tol) {
  if (!family.has_class(ConditionClass::second_order_natural)) {
    throw Error(ErrorCode::class_insufficient, family.spec() + " is not SecondOrderNatural");
  }
  const SequenceFamily squared = square_poles(family);
  JIdentityReport rep{true, 0.0};
  for (const complex z : samples) {
    const complex s = sqrt_branch(z);
    const CertifiedValue plus = eval_K2(family, s, kernel_tol);
    const CertifiedValue minus = eval_K2(family, -s, kernel_tol);
    const complex lhs = (plus.value - minus.value) / (4.0 * s);
    const CertifiedValue rhs = eval_K2(squared, z, kernel_tol);
    const double dev = std::abs(lhs - rhs.value);
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (!(dev <= tol)) rep.holds = false;
  }
  return rep;
}

BoundednessRecord J_boundedness_check(const CircleFunction& f, std::span<const Breakpoint> poles, double r, double p,
                                      double tol, const QuadratureOptions& options) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::p_out_of_range, "p must lie in (0, 1)");
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
  std::vector<Breakpoint> squared;
  squared.reserve(poles.size());
  for (const auto& bp : poles) squared.push_back({bp.pole * bp.pole, bp.strength});
  const QuadratureResult outer = circle_abs_power(averaged(f), r, p, squared, options);
  const QuadratureResult inner = circle_abs_power(f, std::sqrt(r), p, poles, options);
  const double factor = std::pow(2.0, 1.0 - 2.0 * p) / std::pow(r, 0.5 * p);
  BoundednessRecord rec;
  rec.lhs = outer.value;
  rec.lhs_error = outer.error_estimate;
  rec.rhs = factor * inner.value;
  rec.rhs_error = factor * inner.error_estimate;
  rec.ratio = rec.rhs > 0.0 ? rec.lhs / rec.rhs : (rec.lhs > 0.0 ? INFINITY : 0.0);
  rec.holds = rec.lhs - rec.lhs_error <= (rec.rhs + rec.rhs_error) * (1.0 + tol);
  return rec;
}

}  // namespace kdecay
