#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdecay/circle.hpp"
#include "kdecay/quadrature.hpp"
#include "kdecay/sequences.hpp"

namespace kdecay {

enum class SignClaim { re_positive, re_negative, im_positive, im_negative };

const char* to_string(SignClaim c) noexcept;

/// Which side of the disk the part's poles came from.
enum class SplitSource { tail, start };

/// One of the four constant-sign pieces of a derivative-kernel sum on |z| < r.
/// Tail parts evaluate sum coef/(z-t)^2; start parts sum r^2 coef/(r^2 - z conj t)^2.
struct SignSplitPart {
  std::string label;  ///< F1..F4 or G1..G4
  SplitSource source = SplitSource::tail;
  std::vector<PoleTerm> terms;  ///< (coefficient, original pole)
  SignClaim claim = SignClaim::re_positive;
  double radius = 0.0;

  complex evaluate(complex z) const;
  CircleFunction function() const;
  /// Poles of the part as a function of z.
  std::vector<complex> singularities() const;
  /// Distance from the closed disk |z| <= r to the nearest singularity (+inf when empty).
  double min_pole_distance() const;
  bool satisfies_claim(complex value) const;
};

/// Tail terms |t| > r sqrt2, split by the sign of Re / Im of c e^{-2i arg t}.
std::array<SignSplitPart, 4> split_tail(std::span<const PoleTerm> terms, double r);

/// Start terms |t| < r/sqrt2 after reflection t -> r^2 / conj t, split by sign of Re c / Im c.
std::array<SignSplitPart, 4> split_start_reflected(std::span<const PoleTerm> terms, double r);

/// Re(e^{2i arg t} / (z - t)^2) > 0, decided by a cancellation-free equivalent.
bool halfplane_tail_predicate(complex z, complex t, double r);

/// Re(1 / (r^2 - z conj t)^2) > 0, decided by a cancellation-free equivalent.
bool halfplane_start_predicate(complex z, complex t, double r);

struct SmirnovRecord {
  double lhs = 0.0;
  double lhs_error = 0.0;
  double rhs = 0.0;
  bool holds = false;
  std::uint64_t evaluations = 0;
};

/// Checks the sign claim on `samples` disk points (throws Error(sign_claim_violated)
/// with the witness), then compares the circle integral of |part|^p with
/// (2 pi / cos(pi p / 2)) |part(0)|^p.
SmirnovRecord smirnov_verify(const SignSplitPart& part, double p, double tol, std::size_t samples = 1000,
                             const QuadratureOptions& options = {});

/// Deterministic points filling the open disk |z| < r (sunflower pattern, shrunk by 1e-9).
std::vector<complex> disk_samples(double r, std::size_t count);

}  // namespace kdecay
