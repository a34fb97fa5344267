#pragma once

#include <span>
#include <string>
#include <vector>

#include "kdecay/sequences.hpp"

namespace kdecay {

/// Every inequality right-hand side the library evaluates.
enum class BoundName { keldysh, ostrovskiy, tail_lemma, start_lemma, single_term, middle_trivial, smirnov };

const char* to_string(BoundName b) noexcept;

struct BoundReport {
  BoundName name = BoundName::keldysh;
  double r = 0.0;
  double p = 0.0;
  double rhs = 0.0;
  std::vector<std::pair<std::string, double>> inputs;  ///< moment sums used
};

/// 2 (1 + (1/r) sum_{|t|<r} |c| + sum_{|t|>r} |c|/|t|).
BoundReport keldysh_rhs(const SequenceFamily& family, double r);

/// (8 pi / cos(pi p/2)) ((sum_{|t|>r} |c|/|t|)^p + ((1/r) sum_{|t|<r} |c|)^p).
BoundReport ostrovskiy_rhs(const SequenceFamily& family, double r, double p);

/// (8 pi / cos(pi p/2)) (sum_{|t|>r sqrt2} |c|/|t|^2)^p.
BoundReport tail_lemma_rhs(const SequenceFamily& family, double r, double p);

/// (8 pi / cos(pi p/2)) ((1/r^2) sum_{|t|<r/sqrt2} |c|)^p.
BoundReport start_lemma_rhs(const SequenceFamily& family, double r, double p);

/// (2 pi / (1 - 2p)) r^{-2p}; p in (0, 1/2).
double single_term_bound(double r, double p);

/// (2 pi / (1 - 2p)) r^{-2p} sum_{r/sqrt2 <= |t| <= r sqrt2} |c|^p; p in (0, 1/2).
BoundReport middle_trivial_rhs(const SequenceFamily& family, double r, double p);

/// Same bounds on an explicit (possibly radius-dependent) term list.
BoundReport keldysh_rhs(std::span<const PoleTerm> terms, double r);
BoundReport ostrovskiy_rhs(std::span<const PoleTerm> terms, double r, double p);
BoundReport tail_lemma_rhs(std::span<const PoleTerm> terms, double r, double p);
BoundReport start_lemma_rhs(std::span<const PoleTerm> terms, double r, double p);
BoundReport middle_trivial_rhs(std::span<const PoleTerm> terms, double r, double p);

/// (2 pi / cos(pi p/2)) |f(0)|^p.
double smirnov_rhs(double value_at_center, double p);

/// -p + (rho + 1 + p) / 2^n.
double bootstrap_exponent(double rho, double p, int n);

/// [rho+1, d(rho+1), ..., d^n(rho+1)] with d(a) = (a - p)/2.
std::vector<double> bootstrap_iterates(double rho, double p, int n);

/// Exponent s with I_p(r) = o(r^s) for the class.
double theorem_prediction(ConditionClass cls, double p, double eps);

/// Strongest class a family declares.
ConditionClass strongest_class(const SequenceFamily& family);

/// sum c/(z-t)^2 = constant - z sum first/(z-t) + z sum second/(z-t)^2.
struct FirstOrderDecomposition {
  complex constant;                 ///< sum c/t^2
  std::vector<PoleTerm> first;      ///< weights c/t^2, order 1
  std::vector<PoleTerm> second;     ///< weights c/t, order 2
  complex evaluate(complex z) const;
};

/// sum c/(z-t)^2 = (1/z^2)(total + 2 sum first/(z-t) + sum second/(z-t)^2).
struct AbsoluteDecomposition {
  complex total;                ///< sum c
  std::vector<PoleTerm> first;  ///< weights c t, order 1
  std::vector<PoleTerm> second; ///< weights c t^2, order 2
  complex evaluate(complex z) const;
};

FirstOrderDecomposition decompose_first_order(std::span<const PoleTerm> terms);
AbsoluteDecomposition decompose_absolute(std::span<const PoleTerm> terms);

}  // namespace kdecay
