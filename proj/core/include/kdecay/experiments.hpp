#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kdecay/quadrature.hpp"
#include "kdecay/sequences.hpp"

namespace kdecay {

/// Which part of the kernel a sweep integrates.
///  full, start, middle, tail: |sum c/(z-t)^2|^p over all / |t|<r/sqrt2 / middle band / |t|>r sqrt2.
///  first_order: |sum c/(z-t)|^p.  lnplus: ln+ |sum c/(z-t)|.
enum class SweepMode { full, start, middle, tail, first_order, lnplus };

const char* to_string(SweepMode m) noexcept;
std::optional<SweepMode> parse_sweep_mode(std::string_view text);

struct SweepOptions {
  QuadratureOptions quadrature{1e-13, 1e-8, 2'000'000, 60, 512};
  bool lnplus_unit_floor = false;  ///< max(1, ln) instead of max(0, ln)
  unsigned threads = 1;
};

struct SweepRecord {
  double r = 0.0;
  double p = 0.0;  ///< 0 for lnplus rows
  SweepMode mode = SweepMode::full;
  double integral_value = 0.0;
  double integral_error = 0.0;
  std::optional<double> keldysh_rhs;
  std::optional<double> ostrovskiy_rhs;
  std::optional<double> tail_rhs;
  std::optional<double> start_rhs;
  std::optional<double> middle_trivial_rhs;
  std::uint64_t terms_used = 0;
  std::uint64_t evaluations = 0;
  bool converged = true;
};

/// One record per (r, p); lnplus yields one record per r. Radii must increase strictly.
std::vector<SweepRecord> sweep(const SequenceFamily& family, std::span<const double> ps, std::span<const double> radii,
                               SweepMode mode, const SweepOptions& options = {});

struct Verdict {
  bool applicable = false;
  bool holds = true;
  std::string bound;  ///< bound compared against
  double measured = 0.0;
  double error = 0.0;
  double rhs = 0.0;
};

/// The inequality each mode is checked against: full uses start + middle + tail.
/// holds iff measured - error <= rhs (1 + 1e-12).
Verdict verdict_of(const SweepRecord& rec);

struct VerdictRow {
  SweepRecord record;
  Verdict verdict;
};

struct VerdictTable {
  std::vector<VerdictRow> rows;
  bool all_hold = true;
};

/// Runs every mode whose bound the family's classes support and checks each row.
VerdictTable verify_inequalities(const SequenceFamily& family, std::span<const double> ps,
                                 std::span<const double> radii, const SweepOptions& options = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (log r, log value) over converged records with r >= r_min.
SlopeFit fit_decay_slope(std::span<const SweepRecord> records, double r_min);

struct ExceptionalSetReport {
  double r = 0.0;
  double eps = 0.0;
  double lambda = 0.0;
  double bad_measure = 0.0;
  double bad_measure_error = 0.0;
  double good_sup = 0.0;
  double M = 0.0;            ///< sup of the ln+ integral over the processed radii
  double integral = 0.0;     ///< ln+ integral (or I_p) at this radius
  double integral_error = 0.0;
  bool holds = true;         ///< bad_measure < eps
};

/// Keldysh form: lambda = e^{M/eps}. With `p`, lambda_k = (I_p(r_k)/eps)^{1/p} instead.
std::vector<ExceptionalSetReport> exceptional_set_report(const SequenceFamily& family, std::span<const double> radii,
                                                         double eps, std::optional<double> p = std::nullopt,
                                                         const SweepOptions& options = {}, std::size_t grid = 4096);

struct BootstrapDemo {
  double direct = 0.0;
  double direct_error = 0.0;
  double via_J_rhs = 0.0;
  double via_J_error = 0.0;
  bool holds = true;
  double ratio = 0.0;
};

/// Middle-band integral at r against the averaged bound from the sqrt-transformed band at sqrt r.
BootstrapDemo middle_bootstrap_demo(const SequenceFamily& family, double p, double r, const SweepOptions& options = {});

/// Geometric radius grid `per_decade` points per decade from lo to hi inclusive.
std::vector<double> geometric_radii(double lo, double hi, double per_decade);

/// `count` geometric radii from lo to hi inclusive.
std::vector<double> geometric_radii_count(double lo, double hi, std::size_t count);

/// Each radius moved within +-1% away from the family's pole moduli.
std::vector<double> nudge_radii(const SequenceFamily& family, std::span<const double> radii);

}  // namespace kdecay
