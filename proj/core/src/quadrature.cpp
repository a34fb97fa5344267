#include "kdecay/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "kdecay/compensated.hpp"
#include "kdecay/error.hpp"

namespace kdecay {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr int initial_cuts = 64;
constexpr double initial_width = two_pi / initial_cuts;
constexpr double on_circle = 1e-12;
constexpr double eps = std::numeric_limits<double>::epsilon();

// Gauss-Kronrod 7/15 on [-1, 1]; odd Kronrod nodes are the Gauss nodes.
constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

double wrap_angle(double a) {
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a = 0.0;
  return a;
}

complex rotation_minus_one(double d) {
  const double s = std::sin(0.5 * d);
  return {-2.0 * s * s, std::sin(d)};
}

struct Anchor {
  complex point;
  double theta = 0.0;
};

struct Segment {
  int anchor = 0;
  double a = 0.0;  // local coordinates relative to the anchor angle
  double b = 0.0;
  bool remainder = false;  // tail of a graded mesh toward an on-circle pole
  bool live = true;
  bool refinable = true;
  std::size_t slot = 0;    // into values / errors / history
};

struct QueueEntry {
  double score;
  std::size_t id;
  bool operator<(const QueueEntry& o) const {
    if (score != o.score) return score < o.score;
    return id > o.id;
  }
};

class Integrator {
 public:
  Integrator(const CircleFunction& f, double r, std::span<const Feature> features, const QuadratureOptions& opt)
      : f_(f), r_(r), features_(features.begin(), features.end()), opt_(opt), F_(features.size()) {}

  std::vector<QuadratureResult> run(std::span<const Breakpoint> breakpoints);

 private:
  struct Prepared {
    complex pole;
    double theta;
    double gap;  // distance from the circle
  };

  int add_anchor(complex point, double theta) {
    anchors_.push_back({point, theta});
    return static_cast<int>(anchors_.size()) - 1;
  }
  std::size_t add_segment(int anchor, double a, double b);
  std::size_t add_remainder(int anchor, double a, double b, std::size_t last, std::size_t prev);
  void integrate(Segment& s);
  void estimate_remainder(Segment& s);
  void graded_side(int anchor, double extent, double sign, double gap_angle, bool singular);
  double score(const Segment& s) const;
  bool converged() const;

  const CircleFunction& f_;
  double r_;
  std::vector<Feature> features_;
  QuadratureOptions opt_;
  std::size_t F_;
  std::uint64_t evaluations_ = 0;
  std::vector<Anchor> anchors_;
  std::vector<Segment> segments_;
  std::vector<double> values_;   // F_ per slot
  std::vector<double> errors_;   // F_ per slot, discretization only
  std::vector<double> perts_;    // F_ per slot, propagated sample bounds
  std::vector<double> history_;  // 2 F_ per slot: last and previous graded level (remainders)
  std::vector<CompensatedSum> total_value_;
  std::vector<CompensatedSum> total_error_;
  std::vector<double> scale_;
  std::vector<double> flagged_;
};

std::size_t Integrator::add_segment(int anchor, double a, double b) {
  Segment s;
  s.anchor = anchor;
  s.a = a;
  s.b = b;
  s.slot = segments_.size();
  values_.resize(values_.size() + F_, 0.0);
  errors_.resize(errors_.size() + F_, 0.0);
  perts_.resize(perts_.size() + F_, 0.0);
  history_.resize(history_.size() + 2 * F_, 0.0);
  segments_.push_back(s);
  integrate(segments_.back());
  return segments_.size() - 1;
}

std::size_t Integrator::add_remainder(int anchor, double a, double b, std::size_t last, std::size_t prev) {
  Segment s;
  s.anchor = anchor;
  s.a = a;
  s.b = b;
  s.remainder = true;
  s.slot = segments_.size();
  values_.resize(values_.size() + F_, 0.0);
  errors_.resize(errors_.size() + F_, 0.0);
  perts_.resize(perts_.size() + F_, 0.0);
  history_.resize(history_.size() + 2 * F_, 0.0);
  for (std::size_t k = 0; k < F_; ++k) {
    history_[s.slot * 2 * F_ + k] = values_[segments_[last].slot * F_ + k];
    history_[s.slot * 2 * F_ + F_ + k] = values_[segments_[prev].slot * F_ + k];
  }
  segments_.push_back(s);
  estimate_remainder(segments_.back());
  return segments_.size() - 1;
}

void Integrator::integrate(Segment& s) {
  const Anchor& anc = anchors_[s.anchor];
  const double c = 0.5 * (s.a + s.b);
  const double h = 0.5 * (s.b - s.a);
  std::array<double, 15 * 8> g{};     // feature values per node (F_ <= 8 handled below)
  std::array<double, 15 * 8> pert{};  // sample perturbation per node
  std::vector<double> gv, pv;
  double* gp = g.data();
  double* pp = pert.data();
  if (F_ > 8) {
    gv.assign(15 * F_, 0.0);
    pv.assign(15 * F_, 0.0);
    gp = gv.data();
    pp = pv.data();
  }
  bool finite = true;
  for (int j = 0; j < 15; ++j) {
    const double x = j < 7 ? -xgk[j] : (j == 7 ? 0.0 : xgk[14 - j]);
    const double d = c + h * x;
    const KernelSample v = f_(CirclePoint{anc.point, anc.point * rotation_minus_one(d)});
    const double m = std::abs(v.value);
    if (!std::isfinite(m) || !std::isfinite(v.bound)) finite = false;
    for (std::size_t k = 0; k < F_; ++k) {
      const Feature& feat = features_[k];
      gp[j * F_ + k] = feat(m);
      pp[j * F_ + k] = v.bound > 0.0 ? feat(m + v.bound) - feat(std::max(m - v.bound, 0.0)) : 0.0;
    }
  }
  evaluations_ += 15;
  for (std::size_t k = 0; k < F_; ++k) {
    double kron = 0.0, gauss = 0.0, abs_sum = 0.0, p_sum = 0.0;
    for (int j = 0; j < 15; ++j) {
      const int idx = j < 8 ? j : 14 - j;
      const double w = wgk[idx];
      const double y = gp[j * F_ + k];
      kron += w * y;
      abs_sum += w * std::abs(y);
      p_sum += w * pp[j * F_ + k];
      if (idx % 2 == 1) gauss += wg[idx / 2] * y;
    }
    double* val = &values_[s.slot * F_ + k];
    double* err = &errors_[s.slot * F_ + k];
    *val = kron * h;
    *err = finite ? std::abs(kron - gauss) * h + 50.0 * eps * abs_sum * h : std::numeric_limits<double>::infinity();
    perts_[s.slot * F_ + k] = finite ? p_sum * h : 0.0;
    if (!finite) *val = 0.0;
  }
  if (!(s.b - s.a > 8.0 * eps * std::max(std::abs(s.a), std::abs(s.b)))) s.refinable = false;
}

void Integrator::estimate_remainder(Segment& s) {
  for (std::size_t k = 0; k < F_; ++k) {
    const double last = history_[s.slot * 2 * F_ + k];
    const double prev = history_[s.slot * 2 * F_ + F_ + k];
    double q = prev > 0.0 ? last / prev : 0.0;
    q = std::clamp(q, 0.0, 0.999);
    const double tail = last * q / (1.0 - q);
    values_[s.slot * F_ + k] = tail;
    errors_[s.slot * F_ + k] = 0.5 * tail;
  }
  const double width = s.b - s.a;
  if (!(width > 1e-280)) s.refinable = false;
}

void Integrator::graded_side(int anchor, double extent, double sign, double gap_angle, bool singular) {
  if (!(extent > 0.0)) return;
  auto seg = [&](double lo, double hi) {
    return sign > 0 ? add_segment(anchor, lo, hi) : add_segment(anchor, -hi, -lo);
  };
  const double w = std::min(extent, initial_width);
  if (extent > w) {
    const int pieces = static_cast<int>(std::ceil((extent - w) / initial_width));
    const double step = (extent - w) / pieces;
    for (int i = 0; i < pieces; ++i) seg(w + i * step, i + 1 == pieces ? extent : w + (i + 1) * step);
  }
  int levels = opt_.singular_levels;
  if (!singular) {
    const double ratio = w / std::max(gap_angle, std::numeric_limits<double>::min());
    levels = std::clamp(static_cast<int>(std::ceil(std::log2(ratio))) + 1, 0, opt_.singular_levels);
  }
  if (singular) levels = std::max(levels, 2);
  double hi = w;
  std::size_t last = 0, prev = 0;
  for (int k = 0; k < levels; ++k) {
    prev = last;
    last = seg(0.5 * hi, hi);
    hi *= 0.5;
  }
  if (!singular) {
    seg(0.0, hi);
    return;
  }
  if (sign > 0) {
    add_remainder(anchor, 0.0, hi, last, prev);
  } else {
    add_remainder(anchor, -hi, 0.0, last, prev);
  }
}

double Integrator::score(const Segment& s) const {
  double out = 0.0;
  for (std::size_t k = 0; k < F_; ++k) out = std::max(out, errors_[s.slot * F_ + k] / scale_[k]);
  return out;
}

bool Integrator::converged() const {
  for (std::size_t k = 0; k < F_; ++k) {
    const double v = std::abs(total_value_[k].value());
    if (!(total_error_[k].value() <= std::max(opt_.abs_tol, opt_.rel_tol * v))) return false;
  }
  return true;
}

std::vector<QuadratureResult> Integrator::run(std::span<const Breakpoint> breakpoints) {
  // Select and order breakpoints.
  const double gate = r_ * initial_width / 8.0;
  std::vector<std::pair<double, Prepared>> ranked;
  for (const auto& bp : breakpoints) {
    const double m = std::abs(bp.pole);
    if (!(m > 0.0) || !std::isfinite(m)) continue;
    const double gap = std::abs(m - r_);
    if (gap >= gate) continue;
    const double key = bp.strength / std::max(gap, r_ * 1e-300);
    ranked.push_back({key, {bp.pole, wrap_angle(std::arg(bp.pole)), gap}});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  if (ranked.size() > opt_.max_breakpoints) ranked.resize(opt_.max_breakpoints);
  std::vector<Prepared> pts;
  for (auto& it : ranked) pts.push_back(it.second);
  std::stable_sort(pts.begin(), pts.end(), [](const Prepared& x, const Prepared& y) {
    if (x.theta != y.theta) return x.theta < y.theta;
    return x.gap < y.gap;
  });
  std::vector<Prepared> merged;
  for (const auto& p : pts) {
    if (!merged.empty() && p.theta - merged.back().theta < 1e-13) continue;  // keeps the closer pole
    merged.push_back(p);
  }
  if (merged.size() > 1 && merged.front().theta + two_pi - merged.back().theta < 1e-13) merged.pop_back();

  if (merged.empty()) {
    for (int i = 0; i < initial_cuts; ++i) {
      const double theta = i * initial_width;
      const int a = add_anchor(std::polar(r_, theta), theta);
      add_segment(a, 0.0, initial_width);
    }
  } else {
    const std::size_t m = merged.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Prepared& p = merged[i];
      const double next = i + 1 < m ? merged[i + 1].theta : merged[0].theta + two_pi;
      const double prev = i > 0 ? merged[i - 1].theta : merged[m - 1].theta - two_pi;
      const double right = m == 1 ? std::numbers::pi : 0.5 * (next - p.theta);
      const double left = m == 1 ? std::numbers::pi : 0.5 * (p.theta - prev);
      const complex point = p.pole * (r_ / std::abs(p.pole));
      const int a = add_anchor(point, p.theta);
      const bool singular = p.gap < on_circle * r_;
      if (singular) flagged_.push_back(p.theta);
      graded_side(a, right, 1.0, p.gap / r_, singular);
      graded_side(a, left, -1.0, p.gap / r_, singular);
    }
  }

  total_value_.assign(F_, CompensatedSum());
  total_error_.assign(F_, CompensatedSum());
  for (const auto& s : segments_) {
    for (std::size_t k = 0; k < F_; ++k) {
      total_value_[k].add(values_[s.slot * F_ + k]);
      total_error_[k].add(errors_[s.slot * F_ + k]);
    }
  }
  scale_.assign(F_, opt_.abs_tol);
  for (std::size_t k = 0; k < F_; ++k) {
    scale_[k] = std::max({opt_.abs_tol, opt_.rel_tol * std::abs(total_value_[k].value()),
                          std::numeric_limits<double>::min()});
  }

  std::priority_queue<QueueEntry> queue;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].refinable) queue.push({score(segments_[i]), i});
  }

  auto retire = [&](std::size_t i) {
    Segment& s = segments_[i];
    s.live = false;
    for (std::size_t k = 0; k < F_; ++k) {
      total_value_[k].add(-values_[s.slot * F_ + k]);
      total_error_[k].add(-errors_[s.slot * F_ + k]);
    }
  };
  auto enlist = [&](std::size_t i) {
    const Segment& s = segments_[i];
    for (std::size_t k = 0; k < F_; ++k) {
      total_value_[k].add(values_[s.slot * F_ + k]);
      total_error_[k].add(errors_[s.slot * F_ + k]);
    }
    if (s.refinable) queue.push({score(s), i});
  };

  bool budget_hit = false;
  while (!converged() && !queue.empty()) {
    if (evaluations_ + 30 > opt_.max_evaluations) {
      budget_hit = true;
      break;
    }
    const QueueEntry top = queue.top();
    queue.pop();
    const Segment s = segments_[top.id];
    retire(top.id);
    if (s.remainder) {
      // one more graded level toward the pole
      const double sign = s.b > 0.0 ? 1.0 : -1.0;
      const double outer = sign > 0 ? s.b : -s.a;
      const double mid = 0.5 * outer;
      const std::size_t level = sign > 0 ? add_segment(s.anchor, mid, outer) : add_segment(s.anchor, -outer, -mid);
      Segment rest;
      rest.anchor = s.anchor;
      rest.a = sign > 0 ? 0.0 : -mid;
      rest.b = sign > 0 ? mid : 0.0;
      rest.remainder = true;
      rest.slot = segments_.size();
      values_.resize(values_.size() + F_, 0.0);
      errors_.resize(errors_.size() + F_, 0.0);
      perts_.resize(perts_.size() + F_, 0.0);
      history_.resize(history_.size() + 2 * F_, 0.0);
      for (std::size_t k = 0; k < F_; ++k) {
        history_[rest.slot * 2 * F_ + k] = values_[segments_[level].slot * F_ + k];
        history_[rest.slot * 2 * F_ + F_ + k] = history_[s.slot * 2 * F_ + k];
      }
      segments_.push_back(rest);
      estimate_remainder(segments_.back());
      enlist(level);
      enlist(segments_.size() - 1);
      continue;
    }
    const double mid = 0.5 * (s.a + s.b);
    const std::size_t lo = add_segment(s.anchor, s.a, mid);
    const std::size_t hi = add_segment(s.anchor, mid, s.b);
    enlist(lo);
    enlist(hi);
  }

  std::vector<QuadratureResult> out(F_);
  std::vector<CompensatedSum> value(F_), error(F_);
  for (const auto& s : segments_) {
    if (!s.live) continue;
    for (std::size_t k = 0; k < F_; ++k) {
      value[k].add(values_[s.slot * F_ + k]);
      error[k].add(errors_[s.slot * F_ + k]);
      error[k].add(perts_[s.slot * F_ + k]);
    }
  }
  std::sort(flagged_.begin(), flagged_.end());
  for (std::size_t k = 0; k < F_; ++k) {
    QuadratureResult& q = out[k];
    q.value = std::max(value[k].value(), 0.0);
    q.error_estimate = std::max(error[k].value(), 0.0);
    q.evaluations = evaluations_;
    q.flagged_singular_angles = flagged_;
    q.converged = !budget_hit && std::isfinite(q.error_estimate) &&
                  q.error_estimate <= std::max(opt_.abs_tol, opt_.rel_tol * q.value) * (1.0 + 1e-9);
  }
  return out;
}

}  // namespace

double Feature::operator()(double modulus) const {
  switch (kind) {
    case Kind::abs_power:
      return modulus == 0.0 ? 0.0 : std::pow(modulus, p);
    case Kind::ln_plus:
      return modulus > 1.0 ? std::log(modulus) : 0.0;
    case Kind::ln_plus_unit_floor:
      return modulus > 0.0 ? std::max(1.0, std::log(modulus)) : 1.0;
  }
  return 0.0;
}

std::vector<Breakpoint> pole_breakpoints(std::span<const PoleTerm> terms, double r) {
  std::vector<Breakpoint> out;
  for (const auto& t : terms) {
    const double m = std::abs(t.pole);
    if (m > 0.0 && std::abs(m - r) < 0.25 * r && t.weight != complex(0.0)) {
      out.push_back({t.pole, std::abs(t.weight)});
    }
  }
  return out;
}

std::vector<QuadratureResult> circle_integrals(const CircleFunction& f, double r, std::span<const Feature> features,
                                               std::span<const Breakpoint> breakpoints,
                                               const QuadratureOptions& options) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
  if (features.empty()) return {};
  Integrator integrator(f, r, features, options);
  return integrator.run(breakpoints);
}

QuadratureResult circle_abs_power(const CircleFunction& f, double r, double p, std::span<const Breakpoint> breakpoints,
                                  const QuadratureOptions& options) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::p_out_of_range, "p must lie in (0, 1)");
  const Feature feat = Feature::power(p);
  return circle_integrals(f, r, std::span<const Feature>(&feat, 1), breakpoints, options).front();
}

QuadratureResult circle_ln_plus(const CircleFunction& f, double r, std::span<const Breakpoint> breakpoints,
                                const QuadratureOptions& options, bool unit_floor) {
  const Feature feat = unit_floor ? Feature::ln_plus_unit_floor() : Feature::ln_plus();
  return circle_integrals(f, r, std::span<const Feature>(&feat, 1), breakpoints, options).front();
}

SuperlevelResult superlevel_measure(const CircleFunction& f, double r, double lambda, std::size_t grid,
                                    std::span<const Breakpoint> breakpoints) {
  if (grid < 1024) throw Error(ErrorCode::invalid_argument, "superlevel grid must have at least 1024 points");
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
  struct Sample {
    double phi;
    complex anchor;
    bool seed;
  };
  std::vector<Sample> samples;
  samples.reserve(grid + breakpoints.size());
  for (std::size_t i = 0; i < grid; ++i) {
    const double phi = two_pi * double(i) / double(grid);
    samples.push_back({phi, std::polar(r, phi), false});
  }
  for (const auto& bp : breakpoints) {
    const double m = std::abs(bp.pole);
    if (!(m > 0.0)) continue;
    samples.push_back({wrap_angle(std::arg(bp.pole)), bp.pole * (r / m), true});
  }
  std::stable_sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.phi < y.phi; });

  SuperlevelResult out;
  auto modulus_at = [&](const complex& anchor, double delta) {
    const double m = std::abs(f(CirclePoint{anchor, anchor * rotation_minus_one(delta)}).value);
    return std::isnan(m) ? std::numeric_limits<double>::infinity() : m;
  };
  auto note = [&](double m) {
    if (m <= lambda) out.good_sup = std::max(out.good_sup, m);
  };
  std::vector<double> mod(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    mod[i] = modulus_at(samples[i].anchor, 0.0);
    note(mod[i]);
  }
  CompensatedSum measure, error;
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double lo = samples[i].phi;
    const double width = (j == 0 ? samples[j].phi + two_pi : samples[j].phi) - lo;
    if (!(width > 0.0)) continue;
    const bool a_in = mod[i] > lambda;
    const bool b_in = mod[j] > lambda;
    if (a_in == b_in) {
      if (a_in) measure.add(width);
      continue;
    }
    // anchor on the seed side so that z - t stays accurate near the pole
    const bool from_right = samples[j].seed && !samples[i].seed;
    const complex anchor = from_right ? samples[j].anchor : samples[i].anchor;
    double x0 = 0.0, x1 = width;  // offsets from lo; indicator(x0) = a_in
    for (int it = 0; it < 60 && x1 - x0 > 4.0 * eps * std::max(1.0, lo); ++it) {
      const double xm = 0.5 * (x0 + x1);
      const double m = from_right ? modulus_at(anchor, xm - width) : modulus_at(anchor, xm);
      note(m);
      if ((m > lambda) == a_in) {
        x0 = xm;
      } else {
        x1 = xm;
      }
    }
    const double cross = 0.5 * (x0 + x1);
    measure.add(a_in ? cross : width - cross);
    error.add(x1 - x0);
    ++out.crossings;
  }
  out.measure = std::clamp(measure.value(), 0.0, two_pi);
  out.error = error.value();
  return out;
}

NudgedRadius nudge_radius(double r, std::span<const double> moduli, double window) {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "radius must be positive");
  std::vector<double> m(moduli.begin(), moduli.end());
  std::sort(m.begin(), m.end());
  auto gap = [&](double x) {
    if (m.empty()) return std::numeric_limits<double>::infinity();
    auto it = std::lower_bound(m.begin(), m.end(), x);
    double g = std::numeric_limits<double>::infinity();
    if (it != m.end()) g = std::min(g, *it - x);
    if (it != m.begin()) g = std::min(g, x - *(it - 1));
    return g;
  };
  const double target = 1e-3 * r;
  const double g0 = gap(r);
  if (g0 >= target) return {r, g0};
  const double lo = r * (1.0 - window);
  const double hi = r * (1.0 + window);
  std::vector<double> candidates = {lo, hi};
  auto first = std::lower_bound(m.begin(), m.end(), lo);
  auto last = std::upper_bound(m.begin(), m.end(), hi);
  if (first != m.begin()) --first;
  if (last != m.end()) ++last;
  for (auto it = first; it != last && it + 1 != m.end(); ++it) {
    const double mid = 0.5 * (*it + *(it + 1));
    if (mid >= lo && mid <= hi) candidates.push_back(mid);
  }
  NudgedRadius best{r, g0};
  for (double c : candidates) {
    const double g = gap(c);
    if (g > best.pole_gap || (g == best.pole_gap && std::abs(c - r) < std::abs(best.radius - r))) best = {c, g};
  }
  return best;
}

}  // namespace kdecay
