#pragma once

#include <cstdint>
#include <vector>

#include "kdecay/circle.hpp"
#include "kdecay/sequences.hpp"

namespace kdecay {

/// Hierarchical multipole evaluator for finite sums c/(z-t)^m, m in {1, 2}.
/// Far clusters use truncated Laurent expansions whose remainder is bounded
/// and reported; near clusters are summed directly.
class PoleTree {
 public:
  explicit PoleTree(std::vector<PoleTerm> terms, int expansion_order = 40, std::size_t leaf_size = 24);

  KernelSample evaluate(const CirclePoint& p, int order) const;

  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  /// Terms in tree order.
  const std::vector<PoleTerm>& terms() const noexcept { return terms_; }

 private:
  struct Node {
    complex center;
    double radius = 0.0;
    double abs_weight = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t child[4] = {-1, -1, -1, -1};
    bool leaf = true;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);
  template <int Order>
  KernelSample evaluate_impl(const CirclePoint& p) const;

  int P_;
  std::size_t leaf_size_;
  std::vector<PoleTerm> terms_;
  std::vector<Node> nodes_;
  std::vector<complex> coeffs_;  // (P_+1) per node, scaled by radius^k
  std::vector<double> binom_;
};

}  // namespace kdecay
