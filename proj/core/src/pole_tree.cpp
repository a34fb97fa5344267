#include "kdecay/pole_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kdecay/compensated.hpp"
#include "kdecay/error.hpp"

namespace kdecay {
namespace {

constexpr double accept_ratio = 2.0;  // |z - center| >= 2 * radius
constexpr int max_depth = 48;

inline complex reciprocal(complex w) noexcept {
  const double n = w.real() * w.real() + w.imag() * w.imag();
  return {w.real() / n, -w.imag() / n};
}

}  // namespace

PoleTree::PoleTree(std::vector<PoleTerm> terms, int expansion_order, std::size_t leaf_size)
    : P_(expansion_order), leaf_size_(std::max<std::size_t>(leaf_size, 1)), terms_(std::move(terms)) {
  if (P_ < 1 || P_ > 80) throw Error(ErrorCode::invalid_argument, "expansion order out of range");
  if (terms_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::invalid_argument, "too many terms for a pole tree");
  }
  const int n = P_ + 1;
  binom_.assign(std::size_t(n) * n, 0.0);
  for (int m = 0; m < n; ++m) {
    binom_[m * n] = 1.0;
    for (int k = 1; k <= m; ++k) {
      binom_[m * n + k] = binom_[(m - 1) * n + k - 1] + (k <= m - 1 ? binom_[(m - 1) * n + k] : 0.0);
    }
  }
  if (!terms_.empty()) {
    nodes_.reserve(2 * terms_.size() / leaf_size_ + 8);
    build(0, static_cast<std::uint32_t>(terms_.size()), 0);
  }
}

std::int32_t PoleTree::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  coeffs_.resize(nodes_.size() * std::size_t(P_ + 1), 0.0);

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  double weight = 0.0;
  for (std::uint32_t i = begin; i < end; ++i) {
    const complex t = terms_[i].pole;
    xmin = std::min(xmin, t.real());
    xmax = std::max(xmax, t.real());
    ymin = std::min(ymin, t.imag());
    ymax = std::max(ymax, t.imag());
    weight += std::abs(terms_[i].weight);
  }
  const complex center(0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
  const bool degenerate = xmax - xmin == 0.0 && ymax - ymin == 0.0;
  const bool leaf = end - begin <= leaf_size_ || depth >= max_depth || degenerate;

  double radius = 0.0;
  std::int32_t children[4] = {-1, -1, -1, -1};
  if (!leaf) {
    auto first = terms_.begin() + begin;
    auto last = terms_.begin() + end;
    auto mid_y = std::partition(first, last, [&](const PoleTerm& t) { return t.pole.imag() < center.imag(); });
    auto q1 = std::partition(first, mid_y, [&](const PoleTerm& t) { return t.pole.real() < center.real(); });
    auto q3 = std::partition(mid_y, last, [&](const PoleTerm& t) { return t.pole.real() < center.real(); });
    const std::uint32_t cuts[5] = {begin, static_cast<std::uint32_t>(q1 - terms_.begin()),
                                   static_cast<std::uint32_t>(mid_y - terms_.begin()),
                                   static_cast<std::uint32_t>(q3 - terms_.begin()), end};
    for (int c = 0; c < 4; ++c) {
      if (cuts[c + 1] > cuts[c]) children[c] = build(cuts[c], cuts[c + 1], depth + 1);
    }
    for (int c = 0; c < 4; ++c) {
      if (children[c] < 0) continue;
      const Node& ch = nodes_[children[c]];
      radius = std::max(radius, std::abs(ch.center - center) + ch.radius);
    }
  } else {
    for (std::uint32_t i = begin; i < end; ++i) radius = std::max(radius, std::abs(terms_[i].pole - center));
  }

  Node& node = nodes_[index];
  node.center = center;
  node.radius = radius;
  node.abs_weight = weight;
  node.begin = begin;
  node.end = end;
  node.leaf = leaf;
  std::copy(children, children + 4, node.child);

  const int n = P_ + 1;
  complex* out = &coeffs_[std::size_t(index) * n];
  const double scale = radius > 0.0 ? radius : 1.0;
  if (leaf) {
    for (std::uint32_t i = begin; i < end; ++i) {
      const complex u = (terms_[i].pole - center) / scale;
      complex v = terms_[i].weight;
      for (int k = 0; k < n; ++k) {
        out[k] += v;
        v *= u;
      }
    }
  } else {
    std::vector<complex> alpha_pow(n), beta_pow(n), shifted(n);
    for (int c = 0; c < 4; ++c) {
      if (children[c] < 0) continue;
      const Node& ch = nodes_[children[c]];
      const complex* src = &coeffs_[std::size_t(children[c]) * n];
      const double alpha = (ch.radius > 0.0 ? ch.radius : 1.0) / scale;
      const complex beta = (ch.center - center) / scale;
      alpha_pow[0] = 1.0;
      beta_pow[0] = 1.0;
      for (int k = 1; k < n; ++k) {
        alpha_pow[k] = alpha_pow[k - 1] * alpha;
        beta_pow[k] = beta_pow[k - 1] * beta;
      }
      for (int k = 0; k < n; ++k) shifted[k] = src[k] * alpha_pow[k];
      for (int m = 0; m < n; ++m) {
        complex acc = 0.0;
        for (int k = 0; k <= m; ++k) acc += binom_[m * n + k] * shifted[k] * beta_pow[m - k];
        out[m] += acc;
      }
    }
  }
  return index;
}

template <int Order>
KernelSample PoleTree::evaluate_impl(const CirclePoint& p) const {
  CompensatedComplexSum acc;
  double bound = 0.0;
  if (nodes_.empty()) return {0.0, 0.0};
  const int n = P_ + 1;
  const double direct_threshold = 0.6 * P_;
  std::int32_t stack[4 * max_depth + 8];
  int top = 0;
  stack[top++] = 0;
  bool hit_pole = false;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    const complex d = (p.anchor - node.center) + p.offset;
    const double dist = std::abs(d);
    const auto count = double(node.end - node.begin);
    if (dist >= accept_ratio * node.radius && count > direct_threshold) {
      const double scale = node.radius > 0.0 ? node.radius : 1.0;
      const complex inv_d = reciprocal(d);
      const complex x = scale * inv_d;
      const double ax = std::abs(x);
      const complex* c = &coeffs_[std::size_t(&node - nodes_.data()) * n];
      complex s = c[P_];
      if constexpr (Order == 1) {
        for (int k = P_ - 1; k >= 0; --k) s = s * x + c[k];
        acc.add(s * inv_d);
        const double xp = std::pow(ax, P_ + 1);
        bound += node.abs_weight / dist * xp / (1.0 - ax);
      } else {
        s *= double(P_ + 1);
        for (int k = P_ - 1; k >= 0; --k) s = s * x + double(k + 1) * c[k];
        acc.add(s * inv_d * inv_d);
        const double xp = std::pow(ax, P_ + 1);
        bound += node.abs_weight / (dist * dist) * xp *
                 ((P_ + 2) / (1.0 - ax) + ax / ((1.0 - ax) * (1.0 - ax)));
      }
      continue;
    }
    if (node.leaf) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const complex w = (p.anchor - terms_[i].pole) + p.offset;
        if (w == complex(0.0)) {
          hit_pole = true;
          continue;
        }
        const complex inv = reciprocal(w);
        if constexpr (Order == 1) {
          acc.add(terms_[i].weight * inv);
        } else {
          acc.add(terms_[i].weight * inv * inv);
        }
      }
      continue;
    }
    for (int c = 3; c >= 0; --c) {
      if (node.child[c] >= 0) stack[top++] = node.child[c];
    }
  }
  if (hit_pole) {
    const double inf = std::numeric_limits<double>::infinity();
    return {complex(inf, inf), inf};
  }
  return {acc.value(), bound};
}

KernelSample PoleTree::evaluate(const CirclePoint& p, int order) const {
  if (order == 1) return evaluate_impl<1>(p);
  if (order == 2) return evaluate_impl<2>(p);
  throw Error(ErrorCode::invalid_argument, "kernel order must be 1 or 2");
}

}  // namespace kdecay
