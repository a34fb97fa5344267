#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kdecay {

using complex = std::complex<double>;

/// One weighted pole c / (z - t).
struct PoleTerm {
  complex weight;
  complex pole;

  friend bool operator==(const PoleTerm&, const PoleTerm&) = default;
};

enum class ConditionClass {
  second_order_natural,  ///< sum |c|/|t|^2 < inf
  first_order_natural,   ///< sum |c|/|t|   < inf
  absolutely_summable,   ///< sum |c|       < inf
};

const char* to_string(ConditionClass c) noexcept;

enum class PairingRule { none, symmetric };

enum class FamilyKind {
  alt,
  alt_reciprocal,
  reciprocal,
  squares,
  geometric,
  lacunary,
  random,
  explicit_terms,
  sqrt_transform,
  squared_poles,
};

/// Interval of pole moduli, each end open or closed.
struct ModulusRange {
  double lo = 0.0;
  bool lo_closed = true;
  double hi = std::numeric_limits<double>::infinity();
  bool hi_closed = true;

  bool contains(double m) const noexcept {
    const bool above = lo_closed ? m >= lo : m > lo;
    const bool below = hi_closed ? m <= hi : m < hi;
    return above && below;
  }
  bool bounded() const noexcept { return hi < std::numeric_limits<double>::infinity(); }

  static ModulusRange closed_ball(double R) { return {0.0, true, R, true}; }
  static ModulusRange open_ball(double R) { return {0.0, true, R, false}; }
  static ModulusRange beyond(double R) {
    return {R, false, std::numeric_limits<double>::infinity(), true};
  }
  static ModulusRange everything() { return {}; }
};

/// Scaled power sums over the tail |t| > cutoff:
/// scaled[i] = cutoff^j * sum c t^-j with j = first_power + i.
struct TailSums {
  double cutoff = 0.0;
  int first_power = 1;
  std::vector<complex> scaled;
  std::vector<double> scaled_error;
};

namespace detail {
class FamilyImpl;
}

/// Immutable generator of weighted poles (c_n, t_n) with |t_n| -> infinity.
/// Copies share state; every member is safe for concurrent use.
class SequenceFamily {
 public:
  static SequenceFamily alt();
  static SequenceFamily alt_reciprocal();
  static SequenceFamily reciprocal(double a);
  static SequenceFamily squares();
  static SequenceFamily geometric(double base = 2.0);
  static SequenceFamily lacunary(double base = 2.0);
  static SequenceFamily random(double rho, double a, std::uint64_t seed,
                               std::uint64_t table_terms = default_table_terms);
  static SequenceFamily single(complex weight, complex pole);
  /// Finite family; `exponent` nullopt marks the convergence exponent as unknown.
  static SequenceFamily from_terms(std::vector<PoleTerm> terms,
                                   std::optional<double> exponent = 0.0);

  static constexpr std::uint64_t default_table_terms = std::uint64_t{1} << 22;

  FamilyKind kind() const;
  const std::string& spec() const;
  bool has_class(ConditionClass c) const;
  std::vector<ConditionClass> classes() const;
  PairingRule pairing() const;
  std::optional<double> exponent() const;
  std::optional<std::uint64_t> seed() const;
  bool finite() const;

  /// Terms with modulus in the bounded range, in canonical order.
  std::vector<PoleTerm> enumerate(const ModulusRange& range) const;

  /// Certified upper bound on sum_{|t|>R} |c| |t|^-k for any real k;
  /// +inf when the series diverges.
  double abs_tail_sum(double R, double k) const;

  /// Smallest cutoff >= R at which tail_power_sums is tabulated.
  double outer_cutoff(double R) const;

  /// Power sums sum_{|t|>cutoff} c t^-j for j in [first, last]; cutoff must come
  /// from outer_cutoff.
  TailSums tail_power_sums(double cutoff, int first, int last) const;

  const detail::FamilyImpl& impl() const { return *impl_; }
  explicit SequenceFamily(std::shared_ptr<const detail::FamilyImpl> impl);

 private:
  std::shared_ptr<const detail::FamilyImpl> impl_;
};

struct AnnulusPartition {
  double radius = 0.0;
  std::vector<PoleTerm> start;   ///< |t| < r/sqrt2
  std::vector<PoleTerm> middle;  ///< r/sqrt2 <= |t| <= r sqrt2
  double tail_threshold = 0.0;   ///< r sqrt2; the tail stays symbolic
};

std::vector<PoleTerm> enumerate_up_to(const SequenceFamily& family, double R);

/// sum_{|t|<R} |c| / |t|^k, exact over enumerated terms.
double partial_moment(const SequenceFamily& family, double R, int k);

/// Certified upper bound on sum_{|t|>R} |c| / |t|^k, k in {1, 2}.
double tail_moment(const SequenceFamily& family, double R, int k);

ModulusRange start_range(double r);
ModulusRange middle_range(double r);
ModulusRange tail_range(double r);

AnnulusPartition partition(const SequenceFamily& family, double r);

double convergence_exponent(const SequenceFamily& family);

/// Poles sqrt(t) (principal branch), weights c / sqrt(t).
SequenceFamily transform_sqrt(const SequenceFamily& family);

/// Poles t^2, weights c t: the family whose second-order sum is the averaged one.
SequenceFamily square_poles(const SequenceFamily& family);

/// Parses `kind(param=value, ...)`. Throws Error(unknown_family_kind / bad_family_spec).
SequenceFamily parse_family(const std::string& spec);

struct BuiltinFamily {
  char label;
  std::string spec;
  SequenceFamily family;
};

/// The eight reference families, labelled a to h.
std::vector<BuiltinFamily> builtin_families();

}  // namespace kdecay
