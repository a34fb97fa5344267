#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "kdecay/bounds.hpp"
#include "kdecay/error.hpp"
#include "kdecay/format.hpp"
#include "kdecay/kernels.hpp"
#include "kdecay/report_io.hpp"
#include "kdecay/sequences.hpp"

namespace kdecay::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const std::map<std::string, Command, std::less<>> command_names = {
    {"eval", Command::eval},     {"integrate", Command::integrate}, {"verify", Command::verify},
    {"sweep", Command::sweep},   {"report", Command::report},       {"list-families", Command::list_families},
};

/// Raw option text before validation; `given` marks keys set by a flag or the config file.
struct RawOptions {
  std::string command, family, r, z, order, mode, tol, abs_tol, rel_tol, eps, out, seed, threads, lnplus_variant;
  std::vector<std::string> p;
  bool include_pole_radii = false;
  bool svg = false;
  std::map<std::string, bool> given;
};

std::optional<ConfigError> real_in(const std::string& key, const std::string& text, double lo, double hi,
                                   double& target) {
  const auto v = parse_real(text);
  if (!v || !std::isfinite(*v)) return ConfigError{key, "'" + text + "' is not a number"};
  if (!(*v > lo && *v < hi)) {
    return ConfigError{key, "value " + text + " must lie in (" + format_real(lo) + ", " + format_real(hi) + ")"};
  }
  target = *v;
  return std::nullopt;
}

std::optional<ConfigError> parse_radius_spec(const std::string& text, RadiusGrid& grid) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() == 1) {
    const auto v = parse_real(parts[0]);
    if (!v || !(*v > 0.0) || !std::isfinite(*v)) return ConfigError{"r", "radius '" + text + "' must be positive"};
    grid = {*v, *v, 0.0};
    return std::nullopt;
  }
  if (parts.size() != 3) return ConfigError{"r", "expected min:max:per_decade, got '" + text + "'"};
  const auto lo = parse_real(parts[0]);
  const auto hi = parse_real(parts[1]);
  const auto per = parse_real(parts[2]);
  if (!lo || !hi || !per) return ConfigError{"r", "non-numeric field in '" + text + "'"};
  if (!(*lo > 0.0 && *hi > *lo && *per > 0.0 && std::isfinite(*hi) && std::isfinite(*per))) {
    return ConfigError{"r", "need 0 < min < max and per_decade > 0 in '" + text + "'"};
  }
  grid = {*lo, *hi, *per};
  return std::nullopt;
}

/// Adds or checks the seed of a random family spec.
std::optional<ConfigError> apply_seed(CliConfig& c) {
  if (!c.seed) return std::nullopt;
  const SequenceFamily fam = parse_family(c.family);
  if (fam.kind() != FamilyKind::random) return std::nullopt;
  static const std::regex has_seed(R"(\bseed\s*=)");
  if (std::regex_search(c.family, has_seed)) {
    if (fam.seed() != c.seed) return ConfigError{"seed", "conflicts with the seed inside the family spec"};
    return std::nullopt;
  }
  const auto close = c.family.rfind(')');
  const bool empty_args = close != std::string::npos && c.family.find('(') + 1 == close;
  c.family.insert(close, (empty_args ? "seed=" : ", seed=") + std::to_string(*c.seed));
  return std::nullopt;
}

std::string key_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::pole_proximity:
    case ErrorCode::evaluation_at_pole: return "z";
    case ErrorCode::tolerance_unreachable: return "tol";
    case ErrorCode::class_insufficient: return "family";
    case ErrorCode::p_out_of_range: return "p";
    case ErrorCode::moment_diverges: return "family";
    default: return "family";
  }
}

SweepOptions sweep_options(const CliConfig& c) {
  SweepOptions o;
  o.quadrature.abs_tol = c.abs_tol;
  o.quadrature.rel_tol = c.rel_tol;
  o.lnplus_unit_floor = c.lnplus_unit_floor;
  o.threads = c.threads;
  return o;
}

std::vector<double> radii_of(const CliConfig& c, const SequenceFamily& family) {
  std::vector<double> radii =
      c.radii.per_decade > 0.0 ? geometric_radii(c.radii.lo, c.radii.hi, c.radii.per_decade) : std::vector{c.radii.lo};
  if (!c.include_pole_radii) radii = nudge_radii(family, radii);
  return radii;
}

std::string joined_argv(const CliConfig& c) {
  std::string out;
  for (const auto& a : c.argv) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

class OutputDir {
 public:
  explicit OutputDir(const CliConfig& c) : root_(c.out_dir) { fs::create_directories(root_); }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = root_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
    written_.push_back(path.string());
  }

  void manifest(const CliConfig& c, const SequenceFamily& family) {
    RunManifest m;
    m.command = joined_argv(c);
    m.family = c.family;
    m.p = c.p;
    m.radius_grid = c.radius_spec;
    m.nudged_radii = !c.include_pole_radii;
    m.abs_tol = c.abs_tol;
    m.rel_tol = c.rel_tol;
    m.seed = family.seed() ? family.seed() : c.seed;
    m.timestamp = run_timestamp();
    m.outputs = written_;
    m.outputs.push_back((root_ / "manifest.json").string());
    write("manifest.json", manifest_json(m));
  }

 private:
  fs::path root_;
  std::vector<std::string> written_;
};

std::size_t failed_verdicts(std::span<const SweepRecord> records) {
  std::size_t n = 0;
  for (const auto& rec : records) {
    const Verdict v = verdict_of(rec);
    if (v.applicable && !v.holds) ++n;
  }
  return n;
}

int run_eval(const CliConfig& c, const SequenceFamily& family, std::ostream& out) {
  const CertifiedValue v = c.order == 1 ? eval_K1(family, *c.z, c.tol) : eval_K2(family, *c.z, c.tol);
  out << "family=" << c.family << '\n'
      << "z=" << format_complex(*c.z) << '\n'
      << "order=" << c.order << '\n'
      << "value=" << format_complex(v.value) << '\n'
      << "truncation_bound=" << format_real(v.truncation_bound) << '\n'
      << "terms_used=" << v.terms_used << '\n';
  return 0;
}

int run_integrate(const CliConfig& c, const SequenceFamily& family, std::ostream& out) {
  const auto radii = radii_of(c, family);
  const auto records = sweep(family, c.p, radii, c.mode, sweep_options(c));
  out << sweep_csv(records);
  return 0;
}

int run_sweep(const CliConfig& c, const SequenceFamily& family, std::ostream& out) {
  const auto radii = radii_of(c, family);
  const auto records = sweep(family, c.p, radii, c.mode, sweep_options(c));
  OutputDir dir(c);
  dir.write("sweep.csv", sweep_csv(records));
  if (c.svg) dir.write("sweep.svg", sweep_svg(records, c.family + " " + to_string(c.mode)));
  dir.manifest(c, family);
  std::size_t converged = 0;
  for (const auto& rec : records) converged += rec.converged ? 1 : 0;
  const std::size_t failed = failed_verdicts(records);
  out << "records=" << records.size() << " converged=" << converged << " failed_verdicts=" << failed << '\n';
  return failed == 0 ? 0 : 1;
}

int run_verify(const CliConfig& c, const SequenceFamily& family, std::ostream& out) {
  const auto radii = radii_of(c, family);
  const VerdictTable table = verify_inequalities(family, c.p, radii, sweep_options(c));
  std::vector<SweepRecord> records;
  std::ostringstream verdicts;
  verdicts << "mode,r,p,bound,measured,error,rhs,holds\n";
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_mode;  // rows, failures
  for (const auto& row : table.rows) {
    records.push_back(row.record);
    const Verdict& v = row.verdict;
    auto& tally = per_mode[to_string(row.record.mode)];
    ++tally.first;
    if (v.applicable && !v.holds) ++tally.second;
    verdicts << to_string(row.record.mode) << ',' << format_real(row.record.r) << ',' << format_real(row.record.p)
             << ',' << v.bound << ',' << format_real(v.measured) << ',' << format_real(v.error) << ','
             << (v.applicable ? format_real(v.rhs) : "") << ',' << (!v.applicable ? "n/a" : v.holds ? "true" : "false")
             << '\n';
  }
  OutputDir dir(c);
  dir.write("verify.csv", sweep_csv(records));
  dir.write("verdicts.csv", verdicts.str());
  dir.manifest(c, family);
  for (const auto& [mode, tally] : per_mode) {
    out << mode << ": " << tally.first << " rows, " << tally.second << " failed\n";
  }
  out << (table.all_hold ? "all inequalities hold\n" : "some inequality failed\n");
  return table.all_hold ? 0 : 1;
}

int run_report(const CliConfig& c, const SequenceFamily& family, std::ostream& out) {
  const auto radii = radii_of(c, family);
  const SweepOptions opts = sweep_options(c);
  const auto records = sweep(family, c.p, radii, c.mode, opts);
  const ConditionClass cls = strongest_class(family);

  ordered_json report;
  report["family"] = c.family;
  report["mode"] = to_string(c.mode);
  report["strongest_class"] = to_string(cls);
  ordered_json fits = ordered_json::array();
  for (double p : c.p) {
    std::vector<SweepRecord> subset;
    for (const auto& rec : records) {
      if (rec.p == p) subset.push_back(rec);
    }
    ordered_json entry;
    entry["p"] = p;
    if (c.mode == SweepMode::full && p < 0.5) entry["predicted_exponent"] = theorem_prediction(cls, p, 0.15);
    try {
      const SlopeFit fit = fit_decay_slope(subset, radii.front());
      entry["slope"] = fit.slope;
      entry["intercept"] = fit.intercept;
      entry["residual"] = fit.residual;
      entry["points"] = fit.points;
    } catch (const Error& e) {
      entry["slope"] = nullptr;
      entry["note"] = e.what();
    }
    if (family.exponent() && p < 0.5) entry["bootstrap_iterates"] = bootstrap_iterates(*family.exponent(), p, 6);
    fits.push_back(entry);
  }
  report["fits"] = fits;

  bool exceptional_ok = true;
  if (family.has_class(ConditionClass::first_order_natural)) {
    ordered_json rows = ordered_json::array();
    for (const auto& rep : exceptional_set_report(family, radii, c.eps, std::nullopt, opts)) {
      exceptional_ok = exceptional_ok && rep.holds;
      rows.push_back({{"r", rep.r},
                      {"lambda", rep.lambda},
                      {"bad_measure", rep.bad_measure},
                      {"bad_measure_error", rep.bad_measure_error},
                      {"good_sup", rep.good_sup},
                      {"M", rep.M},
                      {"holds", rep.holds}});
    }
    report["exceptional_set"] = {{"eps", c.eps}, {"rows", rows}};
  }
  const std::size_t failed = failed_verdicts(records);
  report["failed_verdicts"] = failed;

  OutputDir dir(c);
  dir.write("sweep.csv", sweep_csv(records));
  dir.write("sweep.svg", sweep_svg(records, c.family + " " + to_string(c.mode)));
  dir.write("report.json", report.dump(2) + "\n");
  dir.manifest(c, family);
  for (const auto& f : report["fits"]) {
    out << "p=" << format_real(f["p"].get<double>()) << " slope="
        << (f["slope"].is_null() ? std::string("n/a") : format_real(f["slope"].get<double>())) << '\n';
  }
  out << "failed_verdicts=" << failed << " exceptional_set=" << (exceptional_ok ? "ok" : "violated") << '\n';
  return failed == 0 && exceptional_ok ? 0 : 1;
}

int run_list(std::ostream& out) {
  for (const auto& b : builtin_families()) {
    out << b.label << "  " << b.spec << "  classes=";
    bool first = true;
    for (auto cls : b.family.classes()) {
      out << (first ? "" : ",") << to_string(cls);
      first = false;
    }
    out << "  pairing=" << (b.family.pairing() == PairingRule::symmetric ? "symmetric" : "none");
    const auto rho = b.family.exponent();
    out << "  exponent=" << (rho ? format_real(*rho) : std::string("unknown")) << '\n';
  }
  return 0;
}

void report_error(std::ostream& err, const ConfigError& e) {
  err << "kdecay: configuration error in '" << e.key << "': " << e.message << '\n';
}

}  // namespace

ParseOutcome parse(int argc, const char* const* argv, std::ostream& out) {
  RawOptions raw;
  CLI::App app{"Certified circle integrals of Cauchy kernel sums", "kdecay"};
  app.set_config("--config", "", "flat key=value file; flags given on the command line win");
  app.allow_config_extras(false);
  app.add_option("command", raw.command, "eval | integrate | verify | sweep | report | list-families")->required();
  app.add_option("--family", raw.family, "family spec, e.g. reciprocal(a=1) or random(rho=1.5, a=2, seed=42)");
  app.add_option("--p", raw.p, "exponent list, comma separated")->delimiter(',');
  app.add_option("--r", raw.r, "radius grid min:max:per_decade, or one radius");
  app.add_option("--z", raw.z, "evaluation point for eval, e.g. 0.5 or 1+2i");
  app.add_option("--order", raw.order, "kernel order for eval: 1 or 2");
  app.add_option("--mode", raw.mode, "full | start | middle | tail | first_order | lnplus");
  app.add_option("--tol", raw.tol, "truncation tolerance for eval");
  app.add_option("--abs-tol", raw.abs_tol, "quadrature absolute tolerance");
  app.add_option("--rel-tol", raw.rel_tol, "quadrature relative tolerance");
  app.add_option("--eps", raw.eps, "exceptional-set budget in radians (report)");
  app.add_option("--out", raw.out, "output directory (KERNEL_DECAY_OUT overrides)");
  app.add_option("--seed", raw.seed, "seed for random families");
  app.add_option("--threads", raw.threads, "worker threads (default: hardware concurrency)");
  app.add_option("--lnplus-variant", raw.lnplus_variant, "zero: max(0, ln); unit: max(1, ln)");
  app.add_flag("--include-pole-radii", raw.include_pole_radii, "keep radii that sit on pole moduli");
  app.add_flag("--svg", raw.svg, "also write an SVG plot (sweep)");

  ParseOutcome outcome;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    outcome.exit_now = 0;
    return outcome;
  } catch (const CLI::ConfigError& e) {
    std::string key = e.what();
    const auto pos = key.rfind(' ');
    outcome.error = ConfigError{pos == std::string::npos ? "config" : key.substr(pos + 1), e.what()};
    return outcome;
  } catch (const CLI::ParseError& e) {
    outcome.error = ConfigError{"command line", e.what()};
    return outcome;
  }
  for (const char* key : {"--family", "--p", "--r", "--z", "--order", "--mode", "--tol", "--abs-tol", "--rel-tol",
                          "--eps", "--out", "--seed", "--threads", "--lnplus-variant"}) {
    raw.given[key + 2] = app.count(key) > 0;
  }

  CliConfig c;
  for (int i = 0; i < argc; ++i) c.argv.emplace_back(argv[i]);
  const auto cmd = command_names.find(raw.command);
  if (cmd == command_names.end()) {
    outcome.error = ConfigError{"command", "unknown command '" + raw.command + "'"};
    return outcome;
  }
  c.command = cmd->second;
  c.family = raw.family;
  if (raw.given["p"]) {
    c.p.clear();
    for (const auto& item : raw.p) {
      double v = 0.0;
      if (auto e = real_in("p", item, 0.0, 1.0, v)) {
        outcome.error = e;
        return outcome;
      }
      c.p.push_back(v);
    }
  }
  if (raw.given["r"]) c.radius_spec = raw.r;
  if (raw.given["z"]) {
    const auto z = parse_complex(raw.z);
    if (!z) {
      outcome.error = ConfigError{"z", "'" + raw.z + "' is not a complex number"};
      return outcome;
    }
    c.z = *z;
  }
  if (raw.given["order"]) {
    if (raw.order != "1" && raw.order != "2") {
      outcome.error = ConfigError{"order", "must be 1 or 2, got '" + raw.order + "'"};
      return outcome;
    }
    c.order = raw.order == "1" ? 1 : 2;
  }
  if (raw.given["mode"]) {
    const auto m = parse_sweep_mode(raw.mode);
    if (!m) {
      outcome.error = ConfigError{"mode", "unknown mode '" + raw.mode + "'"};
      return outcome;
    }
    c.mode = *m;
    c.mode_given = true;
  }
  const double inf = std::numeric_limits<double>::infinity();
  const std::pair<const char*, double*> positive[] = {
      {"tol", &c.tol}, {"abs-tol", &c.abs_tol}, {"rel-tol", &c.rel_tol}};
  for (const auto& [key, target] : positive) {
    if (!raw.given[key]) continue;
    const std::string& text = std::string(key) == "tol" ? raw.tol : std::string(key) == "abs-tol" ? raw.abs_tol : raw.rel_tol;
    if (auto e = real_in(key, text, 0.0, inf, *target)) {
      outcome.error = e;
      return outcome;
    }
  }
  if (raw.given["eps"]) {
    if (auto e = real_in("eps", raw.eps, 0.0, 2.0 * std::numbers::pi, c.eps)) {
      outcome.error = e;
      return outcome;
    }
  }
  if (raw.given["seed"]) {
    std::uint64_t s = 0;
    std::istringstream in(raw.seed);
    if (!(in >> s) || !in.eof() || raw.seed.starts_with('-')) {
      outcome.error = ConfigError{"seed", "'" + raw.seed + "' is not a nonnegative integer"};
      return outcome;
    }
    c.seed = s;
  }
  c.threads = std::max(1u, std::thread::hardware_concurrency());
  if (raw.given["threads"]) {
    unsigned t = 0;
    std::istringstream in(raw.threads);
    if (!(in >> t) || !in.eof() || t == 0 || raw.threads.starts_with('-')) {
      outcome.error = ConfigError{"threads", "'" + raw.threads + "' is not a positive integer"};
      return outcome;
    }
    c.threads = t;
  }
  if (raw.given["lnplus-variant"]) {
    if (raw.lnplus_variant != "zero" && raw.lnplus_variant != "unit") {
      outcome.error = ConfigError{"lnplus-variant", "must be 'zero' or 'unit', got '" + raw.lnplus_variant + "'"};
      return outcome;
    }
    c.lnplus_unit_floor = raw.lnplus_variant == "unit";
  }
  if (raw.given["out"]) c.out_dir = raw.out;
  if (const char* env = std::getenv("KERNEL_DECAY_OUT"); env && *env) c.out_dir = env;
  c.include_pole_radii = raw.include_pole_radii;
  c.svg = raw.svg;
  outcome.config = std::move(c);
  return outcome;
}

std::optional<ConfigError> validate(CliConfig& c) {
  if (c.command == Command::list_families) return std::nullopt;
  if (c.family.empty()) return ConfigError{"family", "required for this command"};
  try {
    parse_family(c.family);
    if (auto e = apply_seed(c)) return e;
  } catch (const Error& e) {
    return ConfigError{"family", e.what()};
  }
  if (auto e = parse_radius_spec(c.radius_spec, c.radii)) return e;
  if (c.command == Command::eval && !c.z) return ConfigError{"z", "required for eval"};
  if (c.command == Command::sweep || c.command == Command::integrate || c.command == Command::report) {
    if (c.mode == SweepMode::full || c.mode == SweepMode::middle) {
      for (double p : c.p) {
        if (!(p < 0.5)) return ConfigError{"p", "mode " + std::string(to_string(c.mode)) + " needs p < 1/2"};
      }
    }
    const SequenceFamily family = parse_family(c.family);
    const bool first = c.mode == SweepMode::first_order || c.mode == SweepMode::lnplus;
    if (first && !family.has_class(ConditionClass::first_order_natural) && family.pairing() == PairingRule::none) {
      return ConfigError{"mode", "family is not first-order summable"};
    }
  }
  if (c.command == Command::report) {
    const SequenceFamily family = parse_family(c.family);
    if (family.classes().empty()) return ConfigError{"family", "declares no condition class"};
  }
  return std::nullopt;
}

int run(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.command == Command::list_families) return run_list(out);
  try {
    const SequenceFamily family = parse_family(c.family);
    switch (c.command) {
      case Command::eval: return run_eval(c, family, out);
      case Command::integrate: return run_integrate(c, family, out);
      case Command::sweep: return run_sweep(c, family, out);
      case Command::verify: return run_verify(c, family, out);
      case Command::report: return run_report(c, family, out);
      case Command::list_families: break;
    }
  } catch (const Error& e) {
    report_error(err, {key_for(e.code()), e.what()});
    return 2;
  } catch (const std::exception& e) {
    err << "kdecay: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ParseOutcome parsed = parse(argc, argv, out);
  if (parsed.exit_now) return *parsed.exit_now;
  if (parsed.error) {
    report_error(err, *parsed.error);
    return 2;
  }
  CliConfig c = std::move(*parsed.config);
  if (auto e = validate(c)) {
    report_error(err, *e);
    return 2;
  }
  return run(c, out, err);
}

}  // namespace kdecay::cli
