#include "kdecay/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "family_impl.hpp"
#include "kdecay/format.hpp"
#include "kdecay/compensated.hpp"
#include "kdecay/error.hpp"
#include "kdecay/special.hpp"

namespace kdecay {
namespace detail {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t enumeration_budget = 400'000'000;
constexpr double modulus_slack = 1e-12;

double grid_value(int i) { return std::exp2((i - 40) / 4.0); }

struct Ordered {
  PoleTerm term;
  double modulus;
  double angle;
  std::size_t index;
};

void emit_sorted(std::vector<Ordered>& items, const TermVisitor& fn) {
  std::sort(items.begin(), items.end(), [](const Ordered& x, const Ordered& y) {
    if (x.modulus != y.modulus) return x.modulus < y.modulus;
    if (x.angle != y.angle) return x.angle < y.angle;
    return x.index < y.index;
  });
  for (const auto& it : items) fn(it.term, it.modulus);
}

/// R^k * sum_{n>N} n^-s with error; +inf when s <= 1.
double zeta_tail_scaled(double s, std::uint64_t N, double R, double k) {
  if (!(s > 1.0)) return inf;
  const double q = double(N) + 1.0;
  const SeriesValue z = hurwitz_zeta_scaled(s, q);
  const double factor = std::exp(k * std::log(R) - s * std::log(q));
  return factor * (z.value + z.error) * (1.0 + 1e-13);
}

/// R^k * sum_{n>N} w^-n n^-k, w > 1: geometric weights at integer poles.
double geometric_tail_scaled(double base, std::uint64_t N, double R, double k, double* error) {
  const double lb = std::log(base);
  CompensatedSum sum;
  double term = 0.0;
  for (std::uint64_t n = N + 1; n < N + 200000; ++n) {
    const double dn = double(n);
    term = std::exp(-dn * lb + k * std::log(R / dn));
    sum.add(term);
    if (term == 0.0) break;
    const double rest = term / (base - 1.0);
    if (rest <= 1e-18 * sum.value()) break;
  }
  const double rest = term / (base - 1.0);
  if (error) *error = rest + 1e-15 * sum.value();
  return sum.value();
}

/// Families whose n-th term (n >= 1) has strictly increasing modulus.
class IndexedFamily : public FamilyImpl {
 public:
  virtual double modulus(std::uint64_t n) const = 0;
  virtual PoleTerm term(std::uint64_t n) const = 0;
  virtual double estimate_count(double R) const = 0;

  std::uint64_t count_upto(double R) const {
    if (R < modulus(1)) return 0;
    double est = std::floor(estimate_count(R));
    if (!(est < 4e18)) throw Error(ErrorCode::invalid_argument, "radius too large to enumerate");
    std::uint64_t n = est < 1.0 ? 1 : static_cast<std::uint64_t>(est);
    while (n > 1 && modulus(n) > R) --n;
    while (modulus(n + 1) <= R) ++n;
    return n;
  }

  std::uint64_t count_below(double R) const {
    const std::uint64_t n = count_upto(R);
    return (n > 0 && modulus(n) == R) ? n - 1 : n;
  }

  std::pair<std::uint64_t, std::uint64_t> index_range(const ModulusRange& range) const {
    if (!range.bounded()) throw Error(ErrorCode::invalid_argument, "cannot enumerate an unbounded range");
    const std::uint64_t first = (range.lo_closed ? count_below(range.lo) : count_upto(range.lo)) + 1;
    const std::uint64_t last = range.hi_closed ? count_upto(range.hi) : count_below(range.hi);
    if (last >= first && last - first > enumeration_budget) {
      throw Error(ErrorCode::invalid_argument, "term budget exceeded");
    }
    return {first, last};
  }

  void visit(const ModulusRange& range, const TermVisitor& fn) const override {
    const auto [first, last] = index_range(range);
    for (std::uint64_t n = first; n <= last; ++n) fn(term(n), modulus(n));
  }

  double modulus_of_rank(std::uint64_t n) const override { return modulus(std::max<std::uint64_t>(n, 1)); }
};

class ReciprocalFamily final : public IndexedFamily {
 public:
  explicit ReciprocalFamily(double a) : a_(a) {
    kind = FamilyKind::reciprocal;
    spec = "reciprocal(a=" + format_real(a) + ")";
    exponent = 1.0;
    if (a > -1.0) class_mask |= class_bit(ConditionClass::second_order_natural);
    if (a > 0.0) class_mask |= class_bit(ConditionClass::first_order_natural);
    if (a > 1.0) class_mask |= class_bit(ConditionClass::absolutely_summable);
  }
  double modulus(std::uint64_t n) const override { return double(n); }
  PoleTerm term(std::uint64_t n) const override {
    const double dn = double(n);
    return {a_ == 0.0 ? 1.0 : std::pow(dn, -a_), dn};
  }
  double estimate_count(double R) const override { return R; }
  double abs_tail_scaled(double R, double k) const override {
    return zeta_tail_scaled(a_ + k, count_upto(R), R, k);
  }
  double outer_cutoff(double R) const override { return R; }
  TailSums tail_sums(double cutoff, int first, int last) const override {
    TailSums out{cutoff, first, {}, {}};
    const std::uint64_t N = count_upto(cutoff);
    const double q = double(N) + 1.0;
    for (int j = first; j <= last; ++j) {
      const double s = a_ + j;
      if (!(s > 1.0)) throw Error(ErrorCode::moment_diverges, "tail power sum of " + spec);
      const SeriesValue z = hurwitz_zeta_scaled(s, q);
      const double factor = std::exp(j * std::log(cutoff) - s * std::log(q));
      out.scaled.emplace_back(factor * z.value, 0.0);
      out.scaled_error.push_back(factor * z.error);
    }
    return out;
  }

 private:
  double a_;
};

class SquaresFamily final : public IndexedFamily {
 public:
  SquaresFamily() {
    kind = FamilyKind::squares;
    spec = "squares()";
    exponent = 0.5;
    class_mask = class_bit(ConditionClass::second_order_natural) |
                 class_bit(ConditionClass::first_order_natural);
  }
  double modulus(std::uint64_t n) const override { return double(n) * double(n); }
  PoleTerm term(std::uint64_t n) const override { return {1.0, modulus(n)}; }
  double estimate_count(double R) const override { return std::sqrt(R); }
  double abs_tail_scaled(double R, double k) const override {
    return zeta_tail_scaled(2.0 * k, count_upto(R), R, k);
  }
  double outer_cutoff(double R) const override { return R; }
  TailSums tail_sums(double cutoff, int first, int last) const override {
    TailSums out{cutoff, first, {}, {}};
    const double q = double(count_upto(cutoff)) + 1.0;
    for (int j = first; j <= last; ++j) {
      const double s = 2.0 * j;
      const SeriesValue z = hurwitz_zeta_scaled(s, q);
      const double factor = std::exp(j * std::log(cutoff) - s * std::log(q));
      out.scaled.emplace_back(factor * z.value, 0.0);
      out.scaled_error.push_back(factor * z.error);
    }
    return out;
  }
};

class GeometricFamily final : public IndexedFamily {
 public:
  explicit GeometricFamily(double base) : base_(base) {
    if (!(base > 1.0)) throw Error(ErrorCode::bad_family_spec, "geometric base must exceed 1");
    kind = FamilyKind::geometric;
    spec = "geometric(base=" + format_real(base) + ")";
    exponent = 1.0;
    class_mask = class_bit(ConditionClass::second_order_natural) |
                 class_bit(ConditionClass::first_order_natural) |
                 class_bit(ConditionClass::absolutely_summable);
  }
  double modulus(std::uint64_t n) const override { return double(n); }
  PoleTerm term(std::uint64_t n) const override {
    return {std::pow(base_, -double(n)), double(n)};
  }
  double estimate_count(double R) const override { return R; }
  double abs_tail_scaled(double R, double k) const override {
    double err = 0.0;
    const double v = geometric_tail_scaled(base_, count_upto(R), R, k, &err);
    return (v + err) * (1.0 + 1e-13);
  }
  double outer_cutoff(double R) const override { return R; }
  TailSums tail_sums(double cutoff, int first, int last) const override {
    TailSums out{cutoff, first, {}, {}};
    const std::uint64_t N = count_upto(cutoff);
    for (int j = first; j <= last; ++j) {
      double err = 0.0;
      const double v = geometric_tail_scaled(base_, N, cutoff, j, &err);
      out.scaled.emplace_back(v, 0.0);
      out.scaled_error.push_back(err);
    }
    return out;
  }

 private:
  double base_;
};

class LacunaryFamily final : public IndexedFamily {
 public:
  explicit LacunaryFamily(double base) : base_(base), log_base_(std::log(base)) {
    if (!(base > 1.0)) throw Error(ErrorCode::bad_family_spec, "lacunary base must exceed 1");
    kind = FamilyKind::lacunary;
    spec = "lacunary(base=" + format_real(base) + ")";
    exponent = 0.0;
    class_mask = class_bit(ConditionClass::second_order_natural) |
                 class_bit(ConditionClass::first_order_natural);
  }
  double modulus(std::uint64_t n) const override { return std::pow(base_, double(n)); }
  PoleTerm term(std::uint64_t n) const override { return {1.0, modulus(n)}; }
  double estimate_count(double R) const override { return std::log(R) / log_base_; }
  double abs_tail_scaled(double R, double k) const override {
    if (!(k > 0.0)) return inf;
    const double lead = std::exp(k * (std::log(R) - double(count_upto(R) + 1) * log_base_));
    return lead / (1.0 - std::exp(-k * log_base_)) * (1.0 + 1e-13);
  }
  double outer_cutoff(double R) const override { return R; }
  TailSums tail_sums(double cutoff, int first, int last) const override {
    TailSums out{cutoff, first, {}, {}};
    const double M = double(count_upto(cutoff) + 1);
    for (int j = first; j <= last; ++j) {
      const double lead = std::exp(j * (std::log(cutoff) - M * log_base_));
      const double v = lead / (1.0 - std::exp(-j * log_base_));
      out.scaled.emplace_back(v, 0.0);
      out.scaled_error.push_back(4e-16 * v * (1.0 + j));
    }
    return out;
  }

 private:
  double base_;
  double log_base_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_interval(std::uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

class RandomFamily final : public IndexedFamily {
 public:
  RandomFamily(double rho, double a, std::uint64_t seed_value, std::uint64_t terms)
      : rho_(rho), a_(a), key_(splitmix64(seed_value)) {
    if (!(rho > 0.0)) throw Error(ErrorCode::bad_family_spec, "random family needs rho > 0");
    kind = FamilyKind::random;
    seed = seed_value;
    table_terms = terms;
    spec = "random(rho=" + format_real(rho) + ", a=" + format_real(a) +
           ", seed=" + std::to_string(seed_value) + ")";
    exponent = rho;
    if ((a + 2.0) / rho > 1.0) class_mask |= class_bit(ConditionClass::second_order_natural);
    if ((a + 1.0) / rho > 1.0) class_mask |= class_bit(ConditionClass::first_order_natural);
    if (a / rho > 1.0) class_mask |= class_bit(ConditionClass::absolutely_summable);
  }
  double modulus(std::uint64_t n) const override { return std::pow(double(n), 1.0 / rho_); }
  PoleTerm term(std::uint64_t n) const override {
    const double m = modulus(n);
    const double u1 = unit_interval(splitmix64(key_ + 2 * n));
    const double u2 = unit_interval(splitmix64(key_ + 2 * n + 1));
    const double pole_angle = 2.0 * std::numbers::pi * u1 - std::numbers::pi;
    const double phase = 2.0 * std::numbers::pi * u2;
    return {std::polar(std::pow(m, -a_), phase), std::polar(m, pole_angle)};
  }
  double estimate_count(double R) const override { return std::pow(R, rho_); }
  double abs_tail_scaled(double R, double k) const override {
    return zeta_tail_scaled((a_ + k) / rho_, count_upto(R), R, k);
  }

 private:
  double rho_;
  double a_;
  std::uint64_t key_;
};

/// Two-sided families over the integers with symmetric enumeration.
class TwoSidedFamily : public FamilyImpl {
 public:
  TwoSidedFamily(bool with_origin, bool reciprocal_weights)
      : with_origin_(with_origin), reciprocal_(reciprocal_weights) {
    kind = reciprocal_ ? FamilyKind::alt_reciprocal : FamilyKind::alt;
    spec = reciprocal_ ? "alt_reciprocal()" : "alt()";
    exponent = 1.0;
    pairing = PairingRule::symmetric;
    class_mask = class_bit(ConditionClass::second_order_natural);
    if (reciprocal_) class_mask |= class_bit(ConditionClass::first_order_natural);
  }

  static std::uint64_t count_upto(double R) { return R < 1.0 ? 0 : static_cast<std::uint64_t>(std::floor(R)); }

  void visit(const ModulusRange& range, const TermVisitor& fn) const override {
    if (!range.bounded()) throw Error(ErrorCode::invalid_argument, "cannot enumerate an unbounded range");
    if (with_origin_ && range.contains(0.0)) fn({1.0, 0.0}, 0.0);
    const double lo = std::max(range.lo, 0.0);
    std::uint64_t first = static_cast<std::uint64_t>(std::floor(lo));
    if (double(first) < lo || (double(first) == lo && !range.lo_closed) || first == 0) ++first;
    std::uint64_t last = static_cast<std::uint64_t>(std::floor(range.hi));
    if (last > 0 && double(last) == range.hi && !range.hi_closed) --last;
    if (last >= first && last - first > enumeration_budget / 2) {
      throw Error(ErrorCode::invalid_argument, "term budget exceeded");
    }
    for (std::uint64_t n = first; n <= last; ++n) {
      const double dn = double(n);
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      if (reciprocal_) {
        fn({sign / dn, dn}, dn);
        fn({sign / -dn, -dn}, dn);
      } else {
        fn({sign, dn}, dn);
        fn({sign, -dn}, dn);
      }
    }
  }

  double abs_tail_scaled(double R, double k) const override {
    const double s = reciprocal_ ? k + 1.0 : k;
    return 2.0 * zeta_tail_scaled(s, count_upto(R), R, k);
  }

  double modulus_of_rank(std::uint64_t n) const override { return double(std::max<std::uint64_t>(n / 2, 1)); }

  double outer_cutoff(double R) const override { return R; }

  TailSums tail_sums(double cutoff, int first, int last) const override {
    TailSums out{cutoff, first, {}, {}};
    const std::uint64_t N = count_upto(cutoff);
    for (int j = first; j <= last; ++j) {
      // sum_{|n|>N} c t^-j = factor * eta_N(s), eta_N(s) = sum_{n>N} (-1)^n n^-s
      const int s = reciprocal_ ? j + 1 : j;
      const double factor = reciprocal_ ? (j % 2 == 1 ? 2.0 : 0.0) : (j % 2 == 0 ? 2.0 : 0.0);
      if (factor == 0.0) {
        out.scaled.emplace_back(0.0, 0.0);
        out.scaled_error.push_back(0.0);
        continue;
      }
      const double q_even = double(N / 2) + 1.0;
      const double q_odd = double((N + 1) / 2) + 0.5;
      const SeriesValue ze = hurwitz_zeta_scaled(s, q_even);
      const SeriesValue zo = hurwitz_zeta_scaled(s, q_odd);
      // cutoff^j 2^-s q^-s Z
      const double fe = std::exp(j * std::log(cutoff) - s * std::log(2.0 * q_even));
      const double fo = std::exp(j * std::log(cutoff) - s * std::log(2.0 * q_odd));
      const double even = fe * ze.value;
      const double odd = fo * zo.value;
      out.scaled.emplace_back(factor * (even - odd), 0.0);
      out.scaled_error.push_back(factor * (fe * ze.error + fo * zo.error + 4e-16 * (even + odd)));
    }
    return out;
  }

 private:
  bool with_origin_;
  bool reciprocal_;
};

class FiniteFamily final : public FamilyImpl {
 public:
  FiniteFamily(std::vector<PoleTerm> terms, std::optional<double> rho, std::string label) {
    kind = FamilyKind::explicit_terms;
    finite = true;
    exponent = rho;
    class_mask = class_bit(ConditionClass::second_order_natural) |
                 class_bit(ConditionClass::first_order_natural) |
                 class_bit(ConditionClass::absolutely_summable);
    std::vector<Ordered> items;
    items.reserve(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      items.push_back({terms[i], std::abs(terms[i].pole), std::arg(terms[i].pole), i});
    }
    std::sort(items.begin(), items.end(), [](const Ordered& x, const Ordered& y) {
      if (x.modulus != y.modulus) return x.modulus < y.modulus;
      if (x.angle != y.angle) return x.angle < y.angle;
      return x.index < y.index;
    });
    for (const auto& it : items) {
      terms_.push_back(it.term);
      moduli_.push_back(it.modulus);
    }
    spec = label.empty() ? "explicit(n=" + std::to_string(terms_.size()) + ")" : std::move(label);
  }

  void visit(const ModulusRange& range, const TermVisitor& fn) const override {
    auto it = range.lo_closed ? std::lower_bound(moduli_.begin(), moduli_.end(), range.lo)
                              : std::upper_bound(moduli_.begin(), moduli_.end(), range.lo);
    for (auto i = std::size_t(it - moduli_.begin()); i < moduli_.size(); ++i) {
      if (!range.contains(moduli_[i])) {
        if (moduli_[i] > range.hi) break;
        continue;
      }
      fn(terms_[i], moduli_[i]);
    }
  }

  double abs_tail_scaled(double R, double k) const override {
    CompensatedSum sum;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (moduli_[i] > R) sum.add(std::abs(terms_[i].weight) * std::exp(k * std::log(R / moduli_[i])));
    }
    return sum.value() * (1.0 + 1e-13);
  }

  double modulus_of_rank(std::uint64_t) const override {
    return moduli_.empty() ? 1.0 : moduli_.back();
  }

  double outer_cutoff(double R) const override { return R; }

  TailSums tail_sums(double cutoff, int first, int last) const override {
    TailSums out{cutoff, first, {}, {}};
    for (int j = first; j <= last; ++j) {
      CompensatedComplexSum sum;
      double mag = 0.0;
      for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (moduli_[i] <= cutoff) continue;
        const complex u = cutoff / terms_[i].pole;
        const complex v = terms_[i].weight * std::pow(u, j);
        sum.add(v);
        mag += std::abs(v);
      }
      out.scaled.push_back(sum.value());
      out.scaled_error.push_back(1e-15 * mag);
    }
    return out;
  }

 private:
  std::vector<PoleTerm> terms_;
  std::vector<double> moduli_;
};

class SqrtFamily final : public FamilyImpl {
 public:
  explicit SqrtFamily(SequenceFamily inner) : inner_(std::move(inner)) {
    kind = FamilyKind::sqrt_transform;
    spec = "sqrt(" + inner_.spec() + ")";
    if (inner_.exponent()) exponent = 2.0 * *inner_.exponent();
    if (inner_.has_class(ConditionClass::first_order_natural)) {
      class_mask |= class_bit(ConditionClass::first_order_natural) |
                    class_bit(ConditionClass::second_order_natural);
    }
    if (inner_.has_class(ConditionClass::absolutely_summable)) {
      class_mask |= class_bit(ConditionClass::absolutely_summable);
    }
    table_terms = std::min<std::uint64_t>(inner_.impl().table_terms, std::uint64_t{1} << 21);
  }

  void visit(const ModulusRange& range, const TermVisitor& fn) const override {
    if (!range.bounded()) throw Error(ErrorCode::invalid_argument, "cannot enumerate an unbounded range");
    ModulusRange widened{range.lo * range.lo * (1.0 - modulus_slack), true,
                         range.hi * range.hi * (1.0 + modulus_slack), true};
    std::vector<Ordered> items;
    std::size_t index = 0;
    inner_.impl().visit(widened, [&](const PoleTerm& t, double) {
      if (t.pole == complex(0.0)) throw Error(ErrorCode::invalid_argument, "sqrt transform of a pole at 0");
      const complex s = std::sqrt(t.pole);
      const double m = std::abs(s);
      if (range.contains(m)) items.push_back({{t.weight / s, s}, m, std::arg(s), index});
      ++index;
    });
    emit_sorted(items, fn);
  }

  double abs_tail_scaled(double R, double k) const override {
    const double inner_R = R * R * (1.0 - modulus_slack);
    const double kk = 0.5 * (k + 1.0);
    const double inner = inner_.impl().abs_tail_scaled(inner_R, kk);
    if (!std::isfinite(inner)) return inf;
    return inner * std::exp(k * std::log(R) - kk * std::log(inner_R));
  }

  double modulus_of_rank(std::uint64_t n) const override {
    return std::sqrt(inner_.impl().modulus_of_rank(n));
  }

 private:
  SequenceFamily inner_;
};

class SquaredFamily final : public FamilyImpl {
 public:
  explicit SquaredFamily(SequenceFamily inner) : inner_(std::move(inner)) {
    kind = FamilyKind::squared_poles;
    spec = "square(" + inner_.spec() + ")";
    if (inner_.exponent()) exponent = 0.5 * *inner_.exponent();
    if (inner_.has_class(ConditionClass::first_order_natural)) {
      class_mask |= class_bit(ConditionClass::first_order_natural);
    }
    if (inner_.has_class(ConditionClass::second_order_natural)) {
      class_mask |= class_bit(ConditionClass::second_order_natural);
    }
    table_terms = std::min<std::uint64_t>(inner_.impl().table_terms, std::uint64_t{1} << 21);
  }

  void visit(const ModulusRange& range, const TermVisitor& fn) const override {
    if (!range.bounded()) throw Error(ErrorCode::invalid_argument, "cannot enumerate an unbounded range");
    ModulusRange widened{std::sqrt(range.lo) * (1.0 - modulus_slack), true,
                         std::sqrt(range.hi) * (1.0 + modulus_slack), true};
    std::vector<Ordered> items;
    std::size_t index = 0;
    inner_.impl().visit(widened, [&](const PoleTerm& t, double) {
      const complex s = t.pole * t.pole;
      const double m = std::abs(s);
      if (range.contains(m)) items.push_back({{t.weight * t.pole, s}, m, std::arg(s), index});
      ++index;
    });
    emit_sorted(items, fn);
  }

  double abs_tail_scaled(double R, double k) const override {
    const double inner_R = std::sqrt(R) * (1.0 - modulus_slack);
    const double kk = 2.0 * k - 1.0;
    const double inner = inner_.impl().abs_tail_scaled(inner_R, kk);
    if (!std::isfinite(inner)) return inf;
    return inner * std::exp(k * std::log(R) - kk * std::log(inner_R));
  }

  double modulus_of_rank(std::uint64_t n) const override {
    const double m = inner_.impl().modulus_of_rank(n);
    return m * m;
  }

 private:
  SequenceFamily inner_;
};

}  // namespace

unsigned class_bit(ConditionClass c) { return 1u << static_cast<unsigned>(c); }

const TailTable& FamilyImpl::table() const {
  std::call_once(table_once_, [this] {
    auto t = std::make_unique<TailTable>();
    t->r_max = modulus_of_rank(table_terms);
    for (int i = 0;; ++i) {
      const double g = grid_value(i);
      if (g > t->r_max) break;
      t->grid.push_back(g);
    }
    const std::size_t m = t->grid.size();
    constexpr int J = TailTable::max_power;
    std::vector<complex> bucket(m * J, 0.0);
    if (m > 0) {
      ModulusRange range{t->grid.front(), false, t->r_max, true};
      visit(range, [&](const PoleTerm& term, double modulus) {
        auto it = std::lower_bound(t->grid.begin(), t->grid.end(), modulus);
        const std::size_t i = std::size_t(it - t->grid.begin()) - 1;  // grid[i] < modulus
        const complex u = t->grid[i] / term.pole;
        complex v = term.weight;
        complex* row = &bucket[i * J];
        for (int j = 0; j < J; ++j) {
          v *= u;
          row[j] += v;
        }
      });
      t->scaled.assign(m * J, 0.0);
      for (std::size_t i = m; i-- > 0;) {
        for (int j = 0; j < J; ++j) {
          complex acc = bucket[i * J + j];
          if (i + 1 < m) {
            const double ratio = std::pow(t->grid[i] / t->grid[i + 1], j + 1);
            acc += ratio * t->scaled[(i + 1) * J + j];
          }
          t->scaled[i * J + j] = acc;
        }
      }
    }
    table_ = std::move(t);
  });
  return *table_;
}

double FamilyImpl::outer_cutoff(double R) const {
  const TailTable& t = table();
  auto it = std::lower_bound(t.grid.begin(), t.grid.end(), R);
  return it == t.grid.end() ? R : *it;
}

TailSums FamilyImpl::tail_sums(double cutoff, int first, int last) const {
  const TailTable& t = table();
  TailSums out{cutoff, first, {}, {}};
  auto it = std::lower_bound(t.grid.begin(), t.grid.end(), cutoff);
  const bool on_grid = it != t.grid.end() && *it == cutoff;
  if (!on_grid && cutoff <= t.r_max) {
    throw Error(ErrorCode::invalid_argument, "tail sums requested off the cutoff grid");
  }
  const int top = std::min(last, TailTable::max_power);
  for (int j = first; j <= top; ++j) {
    const double beyond = abs_tail_scaled(cutoff, j);
    if (!on_grid) {
      out.scaled.emplace_back(0.0, 0.0);
      out.scaled_error.push_back(beyond);
      continue;
    }
    const std::size_t i = std::size_t(it - t.grid.begin());
    const double far = abs_tail_scaled(t.r_max, j) * std::pow(cutoff / t.r_max, j);
    out.scaled.push_back(t.scaled[i * TailTable::max_power + (j - 1)]);
    out.scaled_error.push_back(far + 1e-14 * beyond);
  }
  return out;
}

}  // namespace detail

const char* to_string(ConditionClass c) noexcept {
  switch (c) {
    case ConditionClass::second_order_natural: return "SecondOrderNatural";
    case ConditionClass::first_order_natural: return "FirstOrderNatural";
    case ConditionClass::absolutely_summable: return "AbsolutelySummable";
  }
  return "?";
}

SequenceFamily::SequenceFamily(std::shared_ptr<const detail::FamilyImpl> impl) : impl_(std::move(impl)) {}

SequenceFamily SequenceFamily::alt() {
  return SequenceFamily(std::make_shared<detail::TwoSidedFamily>(true, false));
}
SequenceFamily SequenceFamily::alt_reciprocal() {
  return SequenceFamily(std::make_shared<detail::TwoSidedFamily>(false, true));
}
SequenceFamily SequenceFamily::reciprocal(double a) {
  return SequenceFamily(std::make_shared<detail::ReciprocalFamily>(a));
}
SequenceFamily SequenceFamily::squares() { return SequenceFamily(std::make_shared<detail::SquaresFamily>()); }
SequenceFamily SequenceFamily::geometric(double base) {
  return SequenceFamily(std::make_shared<detail::GeometricFamily>(base));
}
SequenceFamily SequenceFamily::lacunary(double base) {
  return SequenceFamily(std::make_shared<detail::LacunaryFamily>(base));
}
SequenceFamily SequenceFamily::random(double rho, double a, std::uint64_t seed, std::uint64_t table_terms) {
  return SequenceFamily(std::make_shared<detail::RandomFamily>(rho, a, seed, table_terms));
}
SequenceFamily SequenceFamily::single(complex weight, complex pole) {
  return SequenceFamily(std::make_shared<detail::FiniteFamily>(
      std::vector<PoleTerm>{{weight, pole}}, 0.0,
      "single(c=" + format_complex(weight) + ", t=" + format_complex(pole) + ")"));
}
SequenceFamily SequenceFamily::from_terms(std::vector<PoleTerm> terms, std::optional<double> exponent) {
  return SequenceFamily(std::make_shared<detail::FiniteFamily>(std::move(terms), exponent, ""));
}

FamilyKind SequenceFamily::kind() const { return impl_->kind; }
const std::string& SequenceFamily::spec() const { return impl_->spec; }
bool SequenceFamily::has_class(ConditionClass c) const { return (impl_->class_mask & detail::class_bit(c)) != 0; }
std::vector<ConditionClass> SequenceFamily::classes() const {
  std::vector<ConditionClass> out;
  for (auto c : {ConditionClass::second_order_natural, ConditionClass::first_order_natural,
                 ConditionClass::absolutely_summable}) {
    if (has_class(c)) out.push_back(c);
  }
  return out;
}
PairingRule SequenceFamily::pairing() const { return impl_->pairing; }
std::optional<double> SequenceFamily::exponent() const { return impl_->exponent; }
std::optional<std::uint64_t> SequenceFamily::seed() const { return impl_->seed; }
bool SequenceFamily::finite() const { return impl_->finite; }

std::vector<PoleTerm> SequenceFamily::enumerate(const ModulusRange& range) const {
  std::vector<PoleTerm> out;
  impl_->visit(range, [&](const PoleTerm& t, double) { out.push_back(t); });
  return out;
}

double SequenceFamily::abs_tail_sum(double R, double k) const {
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "tail radius must be positive");
  const double scaled = impl_->abs_tail_scaled(R, k);
  if (!std::isfinite(scaled)) return scaled;
  return scaled * std::exp(-k * std::log(R));
}

double SequenceFamily::outer_cutoff(double R) const { return impl_->outer_cutoff(R); }

TailSums SequenceFamily::tail_power_sums(double cutoff, int first, int last) const {
  return impl_->tail_sums(cutoff, first, last);
}

std::vector<PoleTerm> enumerate_up_to(const SequenceFamily& family, double R) {
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "R must be positive");
  return family.enumerate(ModulusRange::closed_ball(R));
}

double partial_moment(const SequenceFamily& family, double R, int k) {
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "R must be positive");
  if (k < 0 || k > 2) throw Error(ErrorCode::invalid_argument, "moment order must be 0, 1 or 2");
  CompensatedSum sum;
  family.impl().visit(ModulusRange::open_ball(R), [&](const PoleTerm& t, double m) {
    if (k > 0 && m == 0.0) throw Error(ErrorCode::moment_diverges, "pole at the origin");
    double v = std::abs(t.weight);
    for (int i = 0; i < k; ++i) v /= m;
    sum.add(v);
  });
  return sum.value();
}

double tail_moment(const SequenceFamily& family, double R, int k) {
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "R must be positive");
  if (k != 1 && k != 2) throw Error(ErrorCode::invalid_argument, "tail moment order must be 1 or 2");
  const ConditionClass needed =
      k == 1 ? ConditionClass::first_order_natural : ConditionClass::second_order_natural;
  if (!family.has_class(needed)) {
    throw Error(ErrorCode::moment_diverges, family.spec() + " is not " + to_string(needed));
  }
  return family.abs_tail_sum(R, k);
}

ModulusRange start_range(double r) { return ModulusRange::open_ball(r / std::numbers::sqrt2); }
ModulusRange middle_range(double r) {
  return {r / std::numbers::sqrt2, true, r * std::numbers::sqrt2, true};
}
ModulusRange tail_range(double r) { return ModulusRange::beyond(r * std::numbers::sqrt2); }

AnnulusPartition partition(const SequenceFamily& family, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
  AnnulusPartition out;
  out.radius = r;
  out.start = family.enumerate(start_range(r));
  out.middle = family.enumerate(middle_range(r));
  out.tail_threshold = r * std::numbers::sqrt2;
  return out;
}

double convergence_exponent(const SequenceFamily& family) {
  if (!family.exponent()) throw Error(ErrorCode::unknown_exponent, family.spec());
  return *family.exponent();
}

SequenceFamily transform_sqrt(const SequenceFamily& family) {
  if (family.finite()) {
    std::vector<PoleTerm> mapped;
    for (const auto& t : family.enumerate(ModulusRange::closed_ball(std::numeric_limits<double>::max()))) {
      if (t.pole == complex(0.0)) throw Error(ErrorCode::invalid_argument, "sqrt transform of a pole at 0");
      const complex s = std::sqrt(t.pole);
      mapped.push_back({t.weight / s, s});
    }
    auto ex = family.exponent();
    return SequenceFamily::from_terms(std::move(mapped), ex ? std::optional<double>(2.0 * *ex) : std::nullopt);
  }
  return SequenceFamily(std::make_shared<detail::SqrtFamily>(family));
}

SequenceFamily square_poles(const SequenceFamily& family) {
  if (family.finite()) {
    std::vector<PoleTerm> mapped;
    for (const auto& t : family.enumerate(ModulusRange::closed_ball(std::numeric_limits<double>::max()))) {
      mapped.push_back({t.weight * t.pole, t.pole * t.pole});
    }
    auto ex = family.exponent();
    return SequenceFamily::from_terms(std::move(mapped), ex ? std::optional<double>(0.5 * *ex) : std::nullopt);
  }
  return SequenceFamily(std::make_shared<detail::SquaredFamily>(family));
}

std::vector<BuiltinFamily> builtin_families() {
  return {
      {'a', "alt()", SequenceFamily::alt()},
      {'b', "alt_reciprocal()", SequenceFamily::alt_reciprocal()},
      {'c', "reciprocal(a=1)", SequenceFamily::reciprocal(1.0)},
      {'d', "reciprocal(a=2)", SequenceFamily::reciprocal(2.0)},
      {'e', "squares()", SequenceFamily::squares()},
      {'f', "geometric(base=2)", SequenceFamily::geometric(2.0)},
      {'g', "reciprocal(a=0)", SequenceFamily::reciprocal(0.0)},
      {'h', "random(rho=1.5, a=2, seed=42)", SequenceFamily::random(1.5, 2.0, 42)},
  };
}

}  // namespace kdecay
