#include "kdecay/bounds.hpp"

#include <cmath>
#include <numbers>

#include "kdecay/compensated.hpp"
#include "kdecay/error.hpp"

namespace kdecay {
namespace {

constexpr double pi = std::numbers::pi;

void require_p(double p, double hi) {
  if (!(p > 0.0 && p < hi)) {
    throw Error(ErrorCode::p_out_of_range, hi == 1.0 ? "p must lie in (0, 1)" : "p must lie in (0, 1/2)");
  }
}

void require_r(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
}

void require_class(const SequenceFamily& family, ConditionClass c) {
  if (!family.has_class(c)) throw Error(ErrorCode::class_insufficient, family.spec() + " is not " + to_string(c));
}

double smirnov_factor(double p) { return 2.0 * pi / std::cos(0.5 * pi * p); }

/// sum |c|^power / |t|^k over terms whose modulus satisfies `keep`.
template <class Keep>
double list_moment(std::span<const PoleTerm> terms, int k, Keep keep, double power = 1.0) {
  CompensatedSum sum;
  for (const auto& t : terms) {
    const double m = std::abs(t.pole);
    if (!keep(m)) continue;
    double v = power == 1.0 ? std::abs(t.weight) : std::pow(std::abs(t.weight), power);
    for (int i = 0; i < k; ++i) v /= m;
    sum.add(v);
  }
  return sum.value();
}

BoundReport keldysh_from(double head, double tail, double r) {
  return {BoundName::keldysh, r, 0.0, 2.0 * (1.0 + head / r + tail), {{"head_sum", head}, {"tail_moment1", tail}}};
}

BoundReport ostrovskiy_from(double head, double tail, double r, double p) {
  const double rhs = 4.0 * smirnov_factor(p) * (std::pow(tail, p) + std::pow(head / r, p));
  return {BoundName::ostrovskiy, r, p, rhs, {{"head_sum", head}, {"tail_moment1", tail}}};
}

BoundReport tail_from(double tail2, double r, double p) {
  return {BoundName::tail_lemma, r, p, 4.0 * smirnov_factor(p) * std::pow(tail2, p), {{"tail_moment2", tail2}}};
}

BoundReport start_from(double head, double r, double p) {
  return {BoundName::start_lemma, r, p, 4.0 * smirnov_factor(p) * std::pow(head / (r * r), p), {{"start_sum", head}}};
}

BoundReport middle_from(double powers, double r, double p) {
  return {BoundName::middle_trivial, r, p, single_term_bound(r, p) * powers, {{"middle_power_sum", powers}}};
}

}  // namespace

const char* to_string(BoundName b) noexcept {
  switch (b) {
    case BoundName::keldysh: return "keldysh";
    case BoundName::ostrovskiy: return "ostrovskiy";
    case BoundName::tail_lemma: return "tail";
    case BoundName::start_lemma: return "start";
    case BoundName::single_term: return "single_term";
    case BoundName::middle_trivial: return "middle_trivial";
    case BoundName::smirnov: return "smirnov";
  }
  return "?";
}

BoundReport keldysh_rhs(const SequenceFamily& family, double r) {
  require_r(r);
  require_class(family, ConditionClass::first_order_natural);
  return keldysh_from(partial_moment(family, r, 0), tail_moment(family, r, 1), r);
}

BoundReport ostrovskiy_rhs(const SequenceFamily& family, double r, double p) {
  require_r(r);
  require_p(p, 1.0);
  require_class(family, ConditionClass::first_order_natural);
  return ostrovskiy_from(partial_moment(family, r, 0), tail_moment(family, r, 1), r, p);
}

BoundReport tail_lemma_rhs(const SequenceFamily& family, double r, double p) {
  require_r(r);
  require_p(p, 1.0);
  require_class(family, ConditionClass::second_order_natural);
  return tail_from(tail_moment(family, r * std::numbers::sqrt2, 2), r, p);
}

BoundReport start_lemma_rhs(const SequenceFamily& family, double r, double p) {
  require_r(r);
  require_p(p, 1.0);
  return start_from(partial_moment(family, r / std::numbers::sqrt2, 0), r, p);
}

double single_term_bound(double r, double p) {
  require_r(r);
  require_p(p, 0.5);
  return 2.0 * pi / (1.0 - 2.0 * p) * std::pow(r, -2.0 * p);
}

BoundReport middle_trivial_rhs(const SequenceFamily& family, double r, double p) {
  require_r(r);
  require_p(p, 0.5);
  const auto middle = family.enumerate(middle_range(r));
  return middle_trivial_rhs(middle, r, p);
}

BoundReport keldysh_rhs(std::span<const PoleTerm> terms, double r) {
  require_r(r);
  return keldysh_from(list_moment(terms, 0, [r](double m) { return m < r; }),
                      list_moment(terms, 1, [r](double m) { return m > r; }), r);
}

BoundReport ostrovskiy_rhs(std::span<const PoleTerm> terms, double r, double p) {
  require_r(r);
  require_p(p, 1.0);
  return ostrovskiy_from(list_moment(terms, 0, [r](double m) { return m < r; }),
                         list_moment(terms, 1, [r](double m) { return m > r; }), r, p);
}

BoundReport tail_lemma_rhs(std::span<const PoleTerm> terms, double r, double p) {
  require_r(r);
  require_p(p, 1.0);
  const double threshold = r * std::numbers::sqrt2;
  return tail_from(list_moment(terms, 2, [threshold](double m) { return m > threshold; }), r, p);
}

BoundReport start_lemma_rhs(std::span<const PoleTerm> terms, double r, double p) {
  require_r(r);
  require_p(p, 1.0);
  const double threshold = r / std::numbers::sqrt2;
  return start_from(list_moment(terms, 0, [threshold](double m) { return m < threshold; }), r, p);
}

BoundReport middle_trivial_rhs(std::span<const PoleTerm> terms, double r, double p) {
  require_r(r);
  require_p(p, 0.5);
  const ModulusRange band = middle_range(r);
  return middle_from(list_moment(terms, 0, [&](double m) { return band.contains(m); }, p), r, p);
}

double smirnov_rhs(double value_at_center, double p) {
  require_p(p, 1.0);
  return smirnov_factor(p) * std::pow(std::abs(value_at_center), p);
}

double bootstrap_exponent(double rho, double p, int n) {
  require_p(p, 0.5);
  if (!(rho >= 0.0)) throw Error(ErrorCode::invalid_argument, "rho must be nonnegative");
  if (n < 0) throw Error(ErrorCode::invalid_argument, "iteration count must be nonnegative");
  return -p + (rho + 1.0 + p) * std::exp2(-double(n));
}

std::vector<double> bootstrap_iterates(double rho, double p, int n) {
  require_p(p, 0.5);
  if (!(rho >= 0.0)) throw Error(ErrorCode::invalid_argument, "rho must be nonnegative");
  if (n < 0) throw Error(ErrorCode::invalid_argument, "iteration count must be nonnegative");
  std::vector<double> out{rho + 1.0};
  for (int i = 0; i < n; ++i) out.push_back(0.5 * (out.back() - p));
  return out;
}

double theorem_prediction(ConditionClass cls, double p, double eps) {
  require_p(p, 0.5);
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "eps must be positive");
  switch (cls) {
    case ConditionClass::second_order_natural: return eps;
    case ConditionClass::first_order_natural: return -(p - eps);
    case ConditionClass::absolutely_summable: return -(2.0 * p - eps);
  }
  return eps;
}

ConditionClass strongest_class(const SequenceFamily& family) {
  for (auto c : {ConditionClass::absolutely_summable, ConditionClass::first_order_natural,
                 ConditionClass::second_order_natural}) {
    if (family.has_class(c)) return c;
  }
  throw Error(ErrorCode::class_insufficient, family.spec() + " declares no condition class");
}

complex FirstOrderDecomposition::evaluate(complex z) const {
  CompensatedComplexSum a, b;
  for (const auto& t : first) a.add(t.weight / (z - t.pole));
  for (const auto& t : second) {
    const complex d = z - t.pole;
    b.add(t.weight / (d * d));
  }
  return constant - z * a.value() + z * b.value();
}

complex AbsoluteDecomposition::evaluate(complex z) const {
  if (z == complex(0.0)) throw Error(ErrorCode::invalid_argument, "the absolute decomposition needs z != 0");
  CompensatedComplexSum a, b;
  for (const auto& t : first) a.add(t.weight / (z - t.pole));
  for (const auto& t : second) {
    const complex d = z - t.pole;
    b.add(t.weight / (d * d));
  }
  return (total + 2.0 * a.value() + b.value()) / (z * z);
}

FirstOrderDecomposition decompose_first_order(std::span<const PoleTerm> terms) {
  FirstOrderDecomposition out;
  CompensatedComplexSum constant;
  for (const auto& t : terms) {
    if (t.pole == complex(0.0)) throw Error(ErrorCode::invalid_argument, "pole at the origin");
    const complex inv = 1.0 / t.pole;
    constant.add(t.weight * inv * inv);
    out.first.push_back({t.weight * inv * inv, t.pole});
    out.second.push_back({t.weight * inv, t.pole});
  }
  out.constant = constant.value();
  return out;
}

AbsoluteDecomposition decompose_absolute(std::span<const PoleTerm> terms) {
  AbsoluteDecomposition out;
  CompensatedComplexSum total;
  for (const auto& t : terms) {
    total.add(t.weight);
    out.first.push_back({t.weight * t.pole, t.pole});
    out.second.push_back({t.weight * t.pole * t.pole, t.pole});
  }
  out.total = total.value();
  return out;
}

}  // namespace kdecay
