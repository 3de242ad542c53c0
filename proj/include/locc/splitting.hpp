#pragma once

#include "locc/protocol.hpp"

namespace locc {

struct SplitConfig {
  double delta = 0.0;
  DeviationKind kind = DeviationKind::MeanFailure;
  double level_tol = 1e-6;  // half-width of the "at delta" band
  double b_max = 1.0;       // initial upper bracket for the weakening root
  int max_bisect = 200;
};

/// Outcome of split_protocol. Every leaf of stage_one either sits in
/// s_delta (deviation within level_tol of delta) or was a leaf of the
/// original tree whose deviation never dropped to delta.
struct SplitResult {
  ProtocolTree modified;
  ProtocolTree stage_one;
  std::vector<NodePath> s_delta;  // stage_one leaves at the delta boundary
  Eigen::MatrixXd forget_map;     // original leaves x modified leaves, 0/1
  int iterations = 0;
};

/// Deviation of the family conditioned on reaching the node, with no
/// further measurement. Invariant under rescaling the branch operator.
double node_deviation(const ProtocolTree& tree, const NodePath& path,
                      DeviationKind kind, const WeightedStateFamily& family);

/// Children of the node whose deviation lies strictly below
/// delta - level_tol, in child order.
std::vector<int> d_delta_set(const ProtocolTree& tree, const NodePath& path,
                             const SplitConfig& config,
                             const WeightedStateFamily& family);

/// Weakening parameter b >= 0 with the deviation after the operator
/// sqrt(b 1 + E_child), conditioned on the branch, within level_tol of
/// delta. Bracket doubling followed by bisection.
double find_b(const ProtocolTree& tree, const NodePath& path, int child,
              const SplitConfig& config, const WeightedStateFamily& family);

/// Replaces every measurement round that jumps below delta by its
/// pseudo-weak version plus a recovery level with the original subtrees
/// reattached, so the deviation along every branch passes through delta.
/// Truncating at the boundary yields stage_one; merging outcomes through
/// forget_map reproduces the original outcome distribution.
SplitResult split_protocol(const ProtocolTree& tree, const SplitConfig& config,
                           const WeightedStateFamily& family);

/// Largest entrywise difference between the original distribution and the
/// forget-merged distribution of the modified tree.
ResidualReport equivalence_check(const ProtocolTree& original,
                                 const SplitResult& result,
                                 const WeightedStateFamily& family,
                                 double tol = 1e-8);

}  // namespace locc
