#include "kdecay/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "family_impl.hpp"
#include "kdecay/compensated.hpp"
#include "kdecay/error.hpp"
#include "kdecay/pole_tree.hpp"

namespace kdecay {
namespace {

constexpr int outer_powers = 50;
constexpr double proximity_guard = 1e-9;
constexpr int max_doublings = 40;

void require_class(const SequenceFamily& family, int order) {
  if (order == 1) {
    if (family.has_class(ConditionClass::first_order_natural) || family.pairing() == PairingRule::symmetric) return;
    throw Error(ErrorCode::class_insufficient, family.spec() + " has no convergent first-order sum");
  }
  if (!family.has_class(ConditionClass::second_order_natural)) {
    throw Error(ErrorCode::class_insufficient, family.spec() + " is not SecondOrderNatural");
  }
}

CertifiedValue eval_kernel(const SequenceFamily& family, complex z, double tol, int order) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
  require_class(family, order);
  const double guard = proximity_guard * std::max(1.0, std::abs(z));
  double R = std::max(2.0 * std::abs(z), 1.0);
  for (int attempt = 0; attempt < max_doublings; ++attempt, R *= 2.0) {
    const double cutoff = family.outer_cutoff(R);
    std::vector<PoleTerm> inner;
    try {
      inner = family.enumerate(family.finite() ? ModulusRange::everything() : ModulusRange::closed_ball(cutoff));
    } catch (const Error&) {
      break;  // term budget exhausted
    }
    for (const auto& t : inner) {
      if (std::abs(z - t.pole) < guard) {
        throw Error(ErrorCode::pole_proximity, "z is within " + std::to_string(guard) + " of a pole");
      }
    }
    KernelSample outer{0.0, 0.0};
    if (!family.finite()) outer = OuterExpansion(family, cutoff, order).evaluate(z);
    if (outer.bound <= tol) {
      return {eval_partial(inner, z, order) + outer.value, outer.bound, inner.size()};
    }
  }
  throw Error(ErrorCode::tolerance_unreachable, "tail bound stays above " + std::to_string(tol));
}

}  // namespace

CertifiedValue eval_K1(const SequenceFamily& family, complex z, double tol) {
  return eval_kernel(family, z, tol, 1);
}

CertifiedValue eval_K2(const SequenceFamily& family, complex z, double tol) {
  return eval_kernel(family, z, tol, 2);
}

complex eval_partial(std::span<const PoleTerm> terms, complex z, int order) {
  if (order != 1 && order != 2) throw Error(ErrorCode::invalid_argument, "kernel order must be 1 or 2");
  CompensatedComplexSum sum;
  for (const auto& t : terms) {
    const complex d = z - t.pole;
    if (d == complex(0.0)) throw Error(ErrorCode::evaluation_at_pole, "z coincides with a pole");
    const complex inv = 1.0 / d;
    sum.add(order == 1 ? t.weight * inv : t.weight * inv * inv);
  }
  return sum.value();
}

OuterExpansion::OuterExpansion(const SequenceFamily& family, double cutoff, int order)
    : cutoff_(cutoff), order_(order), first_power_(order) {
  if (order != 1 && order != 2) throw Error(ErrorCode::invalid_argument, "kernel order must be 1 or 2");
  if (!(cutoff > 0.0)) throw Error(ErrorCode::invalid_argument, "cutoff must be positive");
  remainder_scale_ = family.impl().abs_tail_scaled(cutoff, 2.0);
  if (!std::isfinite(remainder_scale_)) {
    throw Error(ErrorCode::moment_diverges, family.spec() + " has no convergent second moment");
  }
  TailSums t = family.tail_power_sums(cutoff, first_power_, outer_powers);
  sums_ = std::move(t.scaled);
  sum_errors_ = std::move(t.scaled_error);
}

KernelSample OuterExpansion::evaluate(complex z) const {
  if (sums_.empty()) return {0.0, 0.0};
  const complex w = z / cutoff_;
  const double x = std::abs(w);
  if (!(x < 1.0)) {
    const double inf = std::numeric_limits<double>::infinity();
    return {0.0, inf};
  }
  const int K = static_cast<int>(sums_.size());
  complex acc = 0.0;
  double err = 0.0;
  if (order_ == 1) {
    for (int k = K - 1; k >= 0; --k) {
      acc = acc * w + sums_[k];
      err = err * x + sum_errors_[k];
    }
    const double rem = remainder_scale_ * std::pow(x, K) / (1.0 - x);
    return {-acc / cutoff_, (err + rem) / cutoff_};
  }
  for (int k = K - 1; k >= 0; --k) {
    acc = acc * w + double(k + 1) * sums_[k];
    err = err * x + double(k + 1) * sum_errors_[k];
  }
  const double rem =
      remainder_scale_ * std::pow(x, K) * ((K + 1) / (1.0 - x) + x / ((1.0 - x) * (1.0 - x)));
  const double R2 = cutoff_ * cutoff_;
  return {acc / R2, (err + rem) / R2};
}

struct KernelField::State {
  int order = 1;
  PoleTree tree;
  OuterExpansion outer;

  State(std::vector<PoleTerm> terms, int order_in, OuterExpansion outer_in)
      : order(order_in), tree(std::move(terms)), outer(std::move(outer_in)) {}
};

KernelField::KernelField(const SequenceFamily& family, const ModulusRange& range, int order, double reach) {
  if (order != 1 && order != 2) throw Error(ErrorCode::invalid_argument, "kernel order must be 1 or 2");
  if (range.bounded() || family.finite()) {
    state_ = std::make_shared<State>(family.enumerate(range.bounded() ? range
                                                                      : ModulusRange{range.lo, range.lo_closed,
                                                                                     std::numeric_limits<double>::max(), true}),
                                     order, OuterExpansion());
    return;
  }
  require_class(family, order);
  const double cutoff = family.outer_cutoff(std::max({2.0 * reach, range.lo, 1e-300}));
  auto inner = family.enumerate(ModulusRange{range.lo, range.lo_closed, cutoff, true});
  state_ = std::make_shared<State>(std::move(inner), order, OuterExpansion(family, cutoff, order));
}

KernelField::KernelField(std::vector<PoleTerm> terms, int order) {
  if (order != 1 && order != 2) throw Error(ErrorCode::invalid_argument, "kernel order must be 1 or 2");
  state_ = std::make_shared<State>(std::move(terms), order, OuterExpansion());
}

KernelSample KernelField::operator()(const CirclePoint& p) const {
  KernelSample s = state_->tree.evaluate(p, state_->order);
  if (!state_->outer.empty()) {
    const KernelSample o = state_->outer.evaluate(p.z());
    s.value += o.value;
    s.bound += o.bound;
  }
  return s;
}

CircleFunction KernelField::function() const {
  return [field = *this](const CirclePoint& p) { return field(p); };
}

int KernelField::order() const noexcept { return state_->order; }
std::uint64_t KernelField::terms_used() const noexcept { return state_->tree.size(); }
const std::vector<PoleTerm>& KernelField::terms() const noexcept { return state_->tree.terms(); }

}  // namespace kdecay
