#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kdecay/sequences.hpp"

namespace kdecay::detail {

using TermVisitor = std::function<void(const PoleTerm&, double modulus)>;

/// Cumulative scaled power sums at a geometric grid of cutoffs, for families
/// without closed-form tails.
struct TailTable {
  static constexpr int max_power = 50;
  double r_max = 0.0;
  std::vector<double> grid;
  std::vector<complex> scaled;  // [i * max_power + (j - 1)]
};

unsigned class_bit(ConditionClass c);

class FamilyImpl {
 public:
  virtual ~FamilyImpl() = default;

  FamilyKind kind = FamilyKind::explicit_terms;
  std::string spec;
  std::optional<double> exponent;
  unsigned class_mask = 0;
  PairingRule pairing = PairingRule::none;
  std::optional<std::uint64_t> seed;
  bool finite = false;
  std::uint64_t table_terms = SequenceFamily::default_table_terms;

  /// Calls fn for every term with modulus in range, in canonical order.
  virtual void visit(const ModulusRange& range, const TermVisitor& fn) const = 0;

  /// R^k * sum_{|t|>R} |c| |t|^-k as a certified upper bound (+inf if divergent).
  virtual double abs_tail_scaled(double R, double k) const = 0;

  /// Modulus below which roughly n terms lie; sizes the fallback table.
  virtual double modulus_of_rank(std::uint64_t n) const = 0;

  virtual double outer_cutoff(double R) const;
  virtual TailSums tail_sums(double cutoff, int first, int last) const;

 private:
  const TailTable& table() const;
  mutable std::once_flag table_once_;
  mutable std::unique_ptr<TailTable> table_;
};

}  // namespace kdecay::detail
