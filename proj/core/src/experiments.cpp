#include "kdecay/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "kdecay/bounds.hpp"
#include "kdecay/error.hpp"
#include "kdecay/kernels.hpp"

namespace kdecay {
namespace {

constexpr double verdict_slack = 1e-12;

template <class Fn>
std::optional<double> try_bound(Fn fn) {
  try {
    return fn();
  } catch (const Error&) {
    return std::nullopt;
  }
}

/// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

KernelField field_for(const SequenceFamily& family, SweepMode mode, double r) {
  switch (mode) {
    case SweepMode::full: return KernelField(family, ModulusRange::everything(), 2, r);
    case SweepMode::start: return KernelField(family, start_range(r), 2, r);
    case SweepMode::middle: return KernelField(family, middle_range(r), 2, r);
    case SweepMode::tail: return KernelField(family, tail_range(r), 2, r);
    case SweepMode::first_order:
    case SweepMode::lnplus: return KernelField(family, ModulusRange::everything(), 1, r);
  }
  throw Error(ErrorCode::invalid_argument, "unknown sweep mode");
}

void attach_bounds(const SequenceFamily& family, SweepRecord& rec) {
  const double r = rec.r;
  const double p = rec.p;
  rec.keldysh_rhs = try_bound([&] { return keldysh_rhs(family, r).rhs; });
  if (p > 0.0) {
    rec.ostrovskiy_rhs = try_bound([&] { return ostrovskiy_rhs(family, r, p).rhs; });
    rec.tail_rhs = try_bound([&] { return tail_lemma_rhs(family, r, p).rhs; });
    rec.start_rhs = try_bound([&] { return start_lemma_rhs(family, r, p).rhs; });
    rec.middle_trivial_rhs = try_bound([&] { return middle_trivial_rhs(family, r, p).rhs; });
  }
}

std::vector<SweepRecord> records_at(const SequenceFamily& family, std::span<const double> ps, double r, SweepMode mode,
                                    const SweepOptions& options) {
  const KernelField field = field_for(family, mode, r);
  const auto breakpoints = pole_breakpoints(field.terms(), r);
  std::vector<Feature> features;
  if (mode == SweepMode::lnplus) {
    features.push_back(options.lnplus_unit_floor ? Feature::ln_plus_unit_floor() : Feature::ln_plus());
  } else {
    for (double p : ps) features.push_back(Feature::power(p));
  }
  const auto results = circle_integrals(field.function(), r, features, breakpoints, options.quadrature);
  std::vector<SweepRecord> out;
  for (std::size_t k = 0; k < results.size(); ++k) {
    SweepRecord rec;
    rec.r = r;
    rec.p = mode == SweepMode::lnplus ? 0.0 : ps[k];
    rec.mode = mode;
    rec.integral_value = results[k].value;
    rec.integral_error = results[k].error_estimate;
    rec.terms_used = field.terms_used();
    rec.evaluations = results[k].evaluations;
    rec.converged = results[k].converged;
    attach_bounds(family, rec);
    out.push_back(rec);
  }
  return out;
}

}  // namespace

const char* to_string(SweepMode m) noexcept {
  switch (m) {
    case SweepMode::full: return "full";
    case SweepMode::start: return "start";
    case SweepMode::middle: return "middle";
    case SweepMode::tail: return "tail";
    case SweepMode::first_order: return "first_order";
    case SweepMode::lnplus: return "lnplus";
  }
  return "?";
}

std::optional<SweepMode> parse_sweep_mode(std::string_view text) {
  for (auto m : {SweepMode::full, SweepMode::start, SweepMode::middle, SweepMode::tail, SweepMode::first_order,
                 SweepMode::lnplus}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::vector<SweepRecord> sweep(const SequenceFamily& family, std::span<const double> ps, std::span<const double> radii,
                               SweepMode mode, const SweepOptions& options) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw Error(ErrorCode::invalid_argument, "radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw Error(ErrorCode::invalid_argument, "radii must increase strictly");
  }
  if (mode != SweepMode::lnplus) {
    if (ps.empty()) throw Error(ErrorCode::invalid_argument, "no p values given");
    const double limit = (mode == SweepMode::full || mode == SweepMode::middle) ? 0.5 : 1.0;
    for (double p : ps) {
      if (!(p > 0.0 && p < limit)) {
        throw Error(ErrorCode::p_out_of_range, std::string("p must lie in (0, ") + (limit == 0.5 ? "1/2" : "1") +
                                                   ") for mode " + to_string(mode));
      }
    }
  }
  std::vector<std::vector<SweepRecord>> per_radius(radii.size());
  parallel_for(radii.size(), options.threads,
               [&](std::size_t i) { per_radius[i] = records_at(family, ps, radii[i], mode, options); });
  std::vector<SweepRecord> out;
  for (auto& v : per_radius) out.insert(out.end(), v.begin(), v.end());
  return out;
}

Verdict verdict_of(const SweepRecord& rec) {
  Verdict v;
  v.measured = rec.integral_value;
  v.error = rec.integral_error;
  std::optional<double> rhs;
  switch (rec.mode) {
    case SweepMode::full:
      v.bound = "start+middle_trivial+tail";
      if (rec.start_rhs && rec.middle_trivial_rhs && rec.tail_rhs) {
        rhs = *rec.start_rhs + *rec.middle_trivial_rhs + *rec.tail_rhs;
      }
      break;
    case SweepMode::start: v.bound = "start"; rhs = rec.start_rhs; break;
    case SweepMode::middle: v.bound = "middle_trivial"; rhs = rec.middle_trivial_rhs; break;
    case SweepMode::tail: v.bound = "tail"; rhs = rec.tail_rhs; break;
    case SweepMode::first_order: v.bound = "ostrovskiy"; rhs = rec.ostrovskiy_rhs; break;
    case SweepMode::lnplus: v.bound = "keldysh"; rhs = rec.keldysh_rhs; break;
  }
  if (!rhs) return v;
  v.applicable = true;
  v.rhs = *rhs;
  v.holds = v.measured - v.error <= v.rhs * (1.0 + verdict_slack);
  return v;
}

VerdictTable verify_inequalities(const SequenceFamily& family, std::span<const double> ps,
                                 std::span<const double> radii, const SweepOptions& options) {
  VerdictTable table;
  std::vector<double> below_one, below_half;
  for (double p : ps) {
    if (p > 0.0 && p < 1.0) below_one.push_back(p);
    if (p > 0.0 && p < 0.5) below_half.push_back(p);
  }
  std::vector<std::pair<SweepMode, std::vector<double>>> plan;
  if (family.has_class(ConditionClass::first_order_natural)) {
    if (!below_one.empty()) plan.push_back({SweepMode::first_order, below_one});
    plan.push_back({SweepMode::lnplus, {}});
  }
  if (family.has_class(ConditionClass::second_order_natural)) {
    if (!below_one.empty()) {
      plan.push_back({SweepMode::tail, below_one});
      plan.push_back({SweepMode::start, below_one});
    }
    if (!below_half.empty()) {
      plan.push_back({SweepMode::middle, below_half});
      plan.push_back({SweepMode::full, below_half});
    }
  }
  for (const auto& [mode, mode_ps] : plan) {
    for (const auto& rec : sweep(family, mode_ps, radii, mode, options)) {
      const Verdict v = verdict_of(rec);
      if (v.applicable && !v.holds) table.all_hold = false;
      table.rows.push_back({rec, v});
    }
  }
  return table;
}

SlopeFit fit_decay_slope(std::span<const SweepRecord> records, double r_min) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& rec : records) {
    if (rec.r >= r_min && rec.converged && rec.integral_value > 0.0) {
      pts.push_back({std::log(rec.r), std::log(rec.integral_value)});
    }
  }
  if (pts.size() < 5) {
    throw Error(ErrorCode::insufficient_data, "need at least 5 converged records, have " + std::to_string(pts.size()));
  }
  const double n = double(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::insufficient_data, "all radii coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (const auto& [x, y] : pts) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss);
  fit.points = pts.size();
  return fit;
}

std::vector<ExceptionalSetReport> exceptional_set_report(const SequenceFamily& family, std::span<const double> radii,
                                                         double eps, std::optional<double> p,
                                                         const SweepOptions& options, std::size_t grid) {
  if (!(eps > 0.0 && eps < 2.0 * std::numbers::pi)) throw Error(ErrorCode::invalid_argument, "eps must lie in (0, 2pi)");
  const double pp = p.value_or(0.0);
  const std::vector<double> ps = p ? std::vector<double>{pp} : std::vector<double>{};
  const auto integrals = sweep(family, ps, radii, p ? SweepMode::first_order : SweepMode::lnplus, options);
  double M = 0.0;
  for (const auto& rec : integrals) M = std::max(M, rec.integral_value);
  std::vector<ExceptionalSetReport> out(radii.size());
  parallel_for(radii.size(), options.threads, [&](std::size_t i) {
    const double r = radii[i];
    ExceptionalSetReport rep;
    rep.r = r;
    rep.eps = eps;
    rep.M = M;
    rep.integral = integrals[i].integral_value;
    rep.integral_error = integrals[i].integral_error;
    if (p) {
      rep.lambda = std::pow(rep.integral / eps, 1.0 / pp);
    } else {
      rep.lambda = std::exp(std::min(M / eps, 700.0));
    }
    const KernelField field(family, ModulusRange::everything(), 1, r);
    const auto bps = pole_breakpoints(field.terms(), r);
    if (rep.lambda > 0.0) {
      const SuperlevelResult s = superlevel_measure(field.function(), r, rep.lambda, grid, bps);
      rep.bad_measure = s.measure;
      rep.bad_measure_error = s.error;
      rep.good_sup = s.good_sup;
    } else {
      // lambda = 0: the kernel vanishes identically on the circle
      rep.bad_measure = 0.0;
      rep.good_sup = 0.0;
    }
    rep.holds = rep.bad_measure < eps;
    out[i] = rep;
  });
  return out;
}

BootstrapDemo middle_bootstrap_demo(const SequenceFamily& family, double p, double r, const SweepOptions& options) {
  if (!(p > 0.0 && p < 0.5)) throw Error(ErrorCode::p_out_of_range, "p must lie in (0, 1/2)");
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
  if (!family.has_class(ConditionClass::first_order_natural)) {
    throw Error(ErrorCode::class_insufficient, family.spec() + " is not FirstOrderNatural");
  }
  BootstrapDemo demo;
  auto middle = family.enumerate(middle_range(r));
  if (middle.empty()) return demo;
  const SequenceFamily transformed = transform_sqrt(SequenceFamily::from_terms(middle));
  auto moved = transformed.enumerate(ModulusRange::closed_ball(std::numeric_limits<double>::max()));

  const KernelField direct_field(std::move(middle), 2);
  const auto direct_bps = pole_breakpoints(direct_field.terms(), r);
  const QuadratureResult direct = circle_abs_power(direct_field.function(), r, p, direct_bps, options.quadrature);

  const double root = std::sqrt(r);
  const KernelField moved_field(std::move(moved), 2);
  const auto moved_bps = pole_breakpoints(moved_field.terms(), root);
  const QuadratureResult inner = circle_abs_power(moved_field.function(), root, p, moved_bps, options.quadrature);

  const double factor = std::pow(2.0, 1.0 - 2.0 * p) / std::pow(r, 0.5 * p);
  demo.direct = direct.value;
  demo.direct_error = direct.error_estimate;
  demo.via_J_rhs = factor * inner.value;
  demo.via_J_error = factor * inner.error_estimate;
  demo.ratio = demo.via_J_rhs > 0.0 ? demo.direct / demo.via_J_rhs : 0.0;
  demo.holds = demo.direct - demo.direct_error <= (demo.via_J_rhs + demo.via_J_error) * (1.0 + verdict_slack);
  return demo;
}

std::vector<double> geometric_radii(double lo, double hi, double per_decade) {
  if (!(lo > 0.0 && hi >= lo && per_decade > 0.0)) throw Error(ErrorCode::invalid_argument, "bad radius grid");
  const long steps = std::lround(per_decade * std::log10(hi / lo));
  std::vector<double> out;
  for (long i = 0; i <= steps; ++i) {
    out.push_back(i == steps ? hi : lo * std::pow(10.0, double(i) / per_decade));
  }
  if (steps == 0 && hi > lo) out.push_back(hi);
  return out;
}

std::vector<double> geometric_radii_count(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo && count >= 2)) throw Error(ErrorCode::invalid_argument, "bad radius grid");
  std::vector<double> out;
  const double step = std::log(hi / lo) / double(count - 1);
  for (std::size_t i = 0; i < count; ++i) out.push_back(i + 1 == count ? hi : lo * std::exp(step * double(i)));
  return out;
}

std::vector<double> nudge_radii(const SequenceFamily& family, std::span<const double> radii) {
  std::vector<double> out;
  for (double r : radii) {
    std::vector<double> moduli;
    for (const auto& t : family.enumerate({r * 0.985, true, r * 1.015, true})) moduli.push_back(std::abs(t.pole));
    out.push_back(nudge_radius(r, moduli).radius);
  }
  return out;
}

}  // namespace kdecay
