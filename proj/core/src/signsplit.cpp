#include "kdecay/signsplit.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kdecay/compensated.hpp"
#include "kdecay/error.hpp"
#include "kdecay/format.hpp"

namespace kdecay {

const char* to_string(SignClaim c) noexcept {
  switch (c) {
    case SignClaim::re_positive: return "Re>0";
    case SignClaim::re_negative: return "Re<0";
    case SignClaim::im_positive: return "Im>0";
    case SignClaim::im_negative: return "Im<0";
  }
  return "?";
}

complex SignSplitPart::evaluate(complex z) const {
  CompensatedComplexSum sum;
  if (source == SplitSource::tail) {
    for (const auto& t : terms) {
      const complex d = z - t.pole;
      sum.add(t.weight / (d * d));
    }
  } else {
    const double r2 = radius * radius;
    for (const auto& t : terms) {
      const complex w = r2 - z * std::conj(t.pole);
      sum.add(r2 * t.weight / (w * w));
    }
  }
  return sum.value();
}

CircleFunction SignSplitPart::function() const {
  return [part = *this](const CirclePoint& p) { return KernelSample{part.evaluate(p.z()), 0.0}; };
}

std::vector<complex> SignSplitPart::singularities() const {
  std::vector<complex> out;
  for (const auto& t : terms) {
    if (source == SplitSource::tail) {
      out.push_back(t.pole);
    } else if (t.pole != complex(0.0)) {
      out.push_back(radius * radius / std::conj(t.pole));
    }
  }
  return out;
}

double SignSplitPart::min_pole_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (const complex s : singularities()) best = std::min(best, std::abs(s) - radius);
  return best;
}

bool SignSplitPart::satisfies_claim(complex v) const {
  switch (claim) {
    case SignClaim::re_positive: return v.real() > 0.0;
    case SignClaim::re_negative: return v.real() < 0.0;
    case SignClaim::im_positive: return v.imag() > 0.0;
    case SignClaim::im_negative: return v.imag() < 0.0;
  }
  return false;
}

std::array<SignSplitPart, 4> split_tail(std::span<const PoleTerm> terms, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
  std::array<SignSplitPart, 4> parts;
  const char* labels[4] = {"F1", "F2", "F3", "F4"};
  const SignClaim claims[4] = {SignClaim::re_positive, SignClaim::re_negative, SignClaim::im_positive,
                               SignClaim::im_negative};
  for (int i = 0; i < 4; ++i) parts[i] = {labels[i], SplitSource::tail, {}, claims[i], r};
  const double threshold = r * std::numbers::sqrt2;
  for (const auto& t : terms) {
    if (!(std::abs(t.pole) > threshold)) {
      throw Error(ErrorCode::term_inside_threshold, "pole " + format_complex(t.pole) + " is not beyond r*sqrt2");
    }
    const complex unit = t.pole / std::abs(t.pole);
    const complex rot = unit * unit;  // e^{2i arg t}
    const complex u = t.weight * std::conj(rot);
    if (u.real() > 0.0) parts[0].terms.push_back({rot * u.real(), t.pole});
    if (u.real() < 0.0) parts[1].terms.push_back({rot * u.real(), t.pole});
    if (u.imag() > 0.0) parts[2].terms.push_back({complex(0.0, 1.0) * rot * u.imag(), t.pole});
    if (u.imag() < 0.0) parts[3].terms.push_back({complex(0.0, 1.0) * rot * u.imag(), t.pole});
  }
  return parts;
}

std::array<SignSplitPart, 4> split_start_reflected(std::span<const PoleTerm> terms, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
  std::array<SignSplitPart, 4> parts;
  const char* labels[4] = {"G1", "G2", "G3", "G4"};
  // -i Im c with Im c > 0 has negative imaginary part on the disk, and vice versa.
  const SignClaim claims[4] = {SignClaim::re_positive, SignClaim::re_negative, SignClaim::im_negative,
                               SignClaim::im_positive};
  for (int i = 0; i < 4; ++i) parts[i] = {labels[i], SplitSource::start, {}, claims[i], r};
  const double threshold = r / std::numbers::sqrt2;
  for (const auto& t : terms) {
    if (!(std::abs(t.pole) < threshold)) {
      throw Error(ErrorCode::term_outside_threshold, "pole " + format_complex(t.pole) + " is not inside r/sqrt2");
    }
    const double re = t.weight.real();
    const double im = t.weight.imag();
    if (re > 0.0) parts[0].terms.push_back({re, t.pole});
    if (re < 0.0) parts[1].terms.push_back({re, t.pole});
    if (im > 0.0) parts[2].terms.push_back({complex(0.0, -im), t.pole});
    if (im < 0.0) parts[3].terms.push_back({complex(0.0, -im), t.pole});
  }
  return parts;
}

bool halfplane_tail_predicate(complex z, complex t, double) {
  // e^{2i arg t}/(z-t)^2 = 1/u^2 with u = e^{-i arg t} z - |t|; Re(1/u^2) > 0 iff |Re u| > |Im u|.
  const double m = std::abs(t);
  const complex v = z * std::conj(t / m);
  return std::abs(m - v.real()) > std::abs(v.imag());
}

bool halfplane_start_predicate(complex z, complex t, double r) {
  const complex w = r * r - z * std::conj(t);
  return std::abs(w.real()) > std::abs(w.imag());
}

std::vector<complex> disk_samples(double r, std::size_t count) {
  std::vector<complex> out;
  out.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double reach = r * (1.0 - 1e-9);
  for (std::size_t k = 0; k < count; ++k) {
    const double rho = reach * std::sqrt((double(k) + 0.5) / double(count));
    out.push_back(std::polar(rho, golden * double(k)));
  }
  return out;
}

SmirnovRecord smirnov_verify(const SignSplitPart& part, double p, double tol, std::size_t samples,
                             const QuadratureOptions& options) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::p_out_of_range, "p must lie in (0, 1)");
  SmirnovRecord rec;
  if (part.terms.empty()) {
    rec.holds = true;
    return rec;
  }
  for (const complex z : disk_samples(part.radius, samples)) {
    const complex v = part.evaluate(z);
    if (!part.satisfies_claim(v)) {
      throw Error(ErrorCode::sign_claim_violated, part.label + " " + to_string(part.claim) + " fails at z=" +
                                                      format_complex(z) + " (value " + format_complex(v) + ")");
    }
  }
  const QuadratureResult q = circle_abs_power(part.function(), part.radius, p, {}, options);
  rec.lhs = q.value;
  rec.lhs_error = q.error_estimate;
  rec.evaluations = q.evaluations;
  rec.rhs = 2.0 * std::numbers::pi / std::cos(0.5 * std::numbers::pi * p) * std::pow(std::abs(part.evaluate(0.0)), p);
  rec.holds = rec.lhs - rec.lhs_error <= rec.rhs * (1.0 + tol);
  return rec;
}

}  // namespace kdecay
