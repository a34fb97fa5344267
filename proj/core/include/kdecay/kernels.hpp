#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "kdecay/circle.hpp"
#include "kdecay/sequences.hpp"

namespace kdecay {

/// A kernel value with a guaranteed bound on the omitted infinite tail.
struct CertifiedValue {
  complex value;
  double truncation_bound = 0.0;
  std::uint64_t terms_used = 0;
};

/// sum c/(z-t). Needs a first-order family or a symmetric pairing rule.
CertifiedValue eval_K1(const SequenceFamily& family, complex z, double tol);

/// sum c/(z-t)^2. Needs a second-order family.
CertifiedValue eval_K2(const SequenceFamily& family, complex z, double tol);

/// Finite sum of c/(z-t)^order in the given order, compensated.
complex eval_partial(std::span<const PoleTerm> terms, complex z, int order);

/// Laurent expansion of the part of a kernel sum with |t| > cutoff, valid for |z| < cutoff.
class OuterExpansion {
 public:
  OuterExpansion() = default;
  OuterExpansion(const SequenceFamily& family, double cutoff, int order);

  bool empty() const noexcept { return sums_.empty(); }
  double cutoff() const noexcept { return cutoff_; }
  KernelSample evaluate(complex z) const;

 private:
  double cutoff_ = 0.0;
  int order_ = 1;
  int first_power_ = 1;
  std::vector<complex> sums_;
  std::vector<double> sum_errors_;
  double remainder_scale_ = 0.0;  // cutoff^2 * sum_{|t|>cutoff} |c| / |t|^2
};

/// The kernel sum over the family terms whose modulus lies in a range, ready for
/// repeated evaluation on a circle. Far terms go through a multipole tree, the
/// infinite remainder through an outer expansion. Copies share state.
class KernelField {
 public:
  /// `reach` bounds |z| of all later evaluation points.
  KernelField(const SequenceFamily& family, const ModulusRange& range, int order, double reach);
  KernelField(std::vector<PoleTerm> terms, int order);

  KernelSample operator()(const CirclePoint& p) const;
  CircleFunction function() const;

  int order() const noexcept;
  std::uint64_t terms_used() const noexcept;
  /// Enumerated poles (tree order).
  const std::vector<PoleTerm>& terms() const noexcept;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

}  // namespace kdecay
