#pragma once

#include <functional>
#include <span>

#include "kdecay/circle.hpp"
#include "kdecay/quadrature.hpp"
#include "kdecay/sequences.hpp"

namespace kdecay {

/// sqrt(rho e^{i theta}) = sqrt(rho) e^{i theta/2} with theta in [0, 2pi).
complex sqrt_branch(complex z);

/// (f(sqrt z) - f(-sqrt z)) / (4 sqrt z).
complex apply_J(const std::function<complex(complex)>& f, complex z);

/// The averaged function as a circle integrand; anchored points stay anchored.
CircleFunction averaged(CircleFunction f);

struct JIdentityReport {
  bool holds = false;
  double max_deviation = 0.0;
};

/// Compares J applied to the family's second-order sum with the second-order sum
/// of the squared-pole family (poles t^2, weights c t) at every sample.
JIdentityReport J_identity_check(const SequenceFamily& family, std::span<const complex> samples, double tol,
                                 double kernel_tol = 1e-14);

struct BoundednessRecord {
  double lhs = 0.0;
  double lhs_error = 0.0;
  double rhs = 0.0;
  double rhs_error = 0.0;
  bool holds = false;
  double ratio = 0.0;  ///< lhs / rhs
};

/// integral |J f|^p at radius r against (2^{1-2p} / r^{p/2}) * integral |f|^p at sqrt r.
/// `poles` are the singularities of f; their squares are those of J f.
BoundednessRecord J_boundedness_check(const CircleFunction& f, std::span<const Breakpoint> poles, double r, double p,
                                      double tol, const QuadratureOptions& options = {});

}  // namespace kdecay
