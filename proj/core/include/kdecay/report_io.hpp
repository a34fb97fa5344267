#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdecay/experiments.hpp"

namespace kdecay {

inline constexpr const char* library_version = "0.1.0";

/// Header plus one row per record; missing bounds are empty fields.
std::string sweep_csv(std::span<const SweepRecord> records);

struct RunManifest {
  std::string command;
  std::string family;
  std::vector<double> p;
  std::string radius_grid;
  bool nudged_radii = true;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  std::optional<std::uint64_t> seed;
  std::string version = library_version;
  std::string timestamp;
  std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& m);

/// UTC ISO-8601; SOURCE_DATE_EPOCH wins over the clock when set.
std::string run_timestamp();

/// Log-log plot of integral values with every bound drawn as a dashed curve.
std::string sweep_svg(std::span<const SweepRecord> records, const std::string& title);

}  // namespace kdecay
