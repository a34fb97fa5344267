#include "kdecay/report_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "kdecay/format.hpp"

namespace kdecay {
namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

}  // namespace

std::string sweep_csv(std::span<const SweepRecord> records) {
  std::ostringstream out;
  out << "r,p,mode,integral_value,integral_error,keldysh_rhs,ostrovskiy_rhs,tail_rhs,start_rhs,"
         "middle_trivial_rhs,terms_used,evaluations,converged\n";
  for (const auto& rec : records) {
    out << format_real(rec.r) << ',' << format_real(rec.p) << ',' << to_string(rec.mode) << ','
        << format_real(rec.integral_value) << ',' << format_real(rec.integral_error) << ','
        << optional_field(rec.keldysh_rhs) << ',' << optional_field(rec.ostrovskiy_rhs) << ','
        << optional_field(rec.tail_rhs) << ',' << optional_field(rec.start_rhs) << ','
        << optional_field(rec.middle_trivial_rhs) << ',' << rec.terms_used << ',' << rec.evaluations << ','
        << (rec.converged ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string run_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["family"] = m.family;
  j["p"] = m.p;
  j["radius_grid"] = m.radius_grid;
  j["nudged_radii"] = m.nudged_radii;
  j["tolerances"] = {{"abs_tol", m.abs_tol}, {"rel_tol", m.rel_tol}};
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
  j["version"] = m.version;
  j["timestamp"] = m.timestamp;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

std::string sweep_svg(std::span<const SweepRecord> records, const std::string& title) {
  constexpr double width = 720, height = 480, left = 70, right = 20, top = 40, bottom = 50;
  struct Series {
    std::string name;
    std::string color;
    bool dashed;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series = {{"integral", "#1f4e79", false, {}},   {"keldysh", "#b03a2e", true, {}},
                                {"ostrovskiy", "#7d3c98", true, {}},  {"tail", "#117864", true, {}},
                                {"start", "#b9770e", true, {}},       {"middle_trivial", "#566573", true, {}}};
  for (const auto& rec : records) {
    const double x = std::log10(rec.r);
    auto put = [&](std::size_t i, const std::optional<double>& v) {
      if (v && *v > 0.0 && std::isfinite(*v)) series[i].pts.push_back({x, std::log10(*v)});
    };
    put(0, rec.integral_value);
    put(1, rec.keldysh_rhs);
    put(2, rec.ostrovskiy_rhs);
    put(3, rec.tail_rhs);
    put(4, rec.start_rhs);
    put(5, rec.middle_trivial_rhs);
  }
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 > x0)) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
  auto sy = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  for (int k = static_cast<int>(std::ceil(x0)); k <= static_cast<int>(std::floor(x1)); ++k) {
    out << "<text x=\"" << sx(k) << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\">1e" << k
        << "</text>\n";
  }
  for (int k = static_cast<int>(std::ceil(y0)); k <= static_cast<int>(std::floor(y1)); ++k) {
    out << "<text x=\"" << left - 6 << "\" y=\"" << sy(k) + 4 << "\" text-anchor=\"end\">1e" << k << "</text>\n";
  }
  out << "<text x=\"" << (width / 2) << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">r</text>\n";
  int legend = 0;
  for (const auto& s : series) {
    if (s.pts.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (const auto& [x, y] : s.pts) out << format_real(sx(x)) << ',' << format_real(sy(y)) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << width - right - 130 << "\" y=\"" << top + 16 * legend << "\" fill=\"" << s.color << "\">"
        << s.name << "</text>\n";
    ++legend;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace kdecay
