#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>

namespace kdecay {

/// Shortest decimal text that parses back to the same double.
std::string format_real(double x);

/// "re", "re+imi" or "re-imi" with round-trip components.
std::string format_complex(std::complex<double> z);

std::optional<double> parse_real(std::string_view text);

/// Accepts "2", "-1.5", "3+4i", "2i", "-i", "1e-3-2.5e2i".
std::optional<std::complex<double>> parse_complex(std::string_view text);

}  // namespace kdecay
