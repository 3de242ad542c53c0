#pragma once

#include "locc/deviation.hpp"

#include <string>

namespace locc {

/// One node of an LOCC protocol tree. Non-root nodes carry the full-space
/// Kraus operator of one local measurement outcome; the children of any
/// node form a complete local instrument on a single party.
struct ProtocolNode {
  int party = -1;  // -1 at the root
  Mat op;
  std::vector<ProtocolNode> children;

  bool is_leaf() const { return children.empty(); }
};

struct ProtocolTree {
  HilbertStructure structure;
  ProtocolNode root;
};

/// Empty protocol: root only, identity operator.
ProtocolTree root_only_tree(const HilbertStructure& h);

/// Node from a (party, local operator) pair, identity padding elsewhere.
ProtocolNode local_node(const HilbertStructure& h, int party, const Mat& local);

/// Address of a node as the child indices along the path from the root.
using NodePath = std::vector<int>;

struct ValidationIssue {
  NodePath node;
  std::string message;
  double residual = 0.0;
};

struct ValidationReport {
  double worst_completeness_residual = 0.0;
  double worst_locality_residual = 0.0;
  std::vector<ValidationIssue> issues;

  bool ok(double tol = 1e-9) const {
    return worst_completeness_residual <= tol &&
           worst_locality_residual <= tol;
  }
};

/// Checks, node by node, that children form complete instruments and act
/// locally on their declared party. Reports, never throws.
ValidationReport validate(const ProtocolTree& tree, double tol = 1e-9);

const ProtocolNode& node_at(const ProtocolTree& tree, const NodePath& path);

/// Reversed-order product of the operators along the root path,
/// A_{(s_m)} ... A_{(s_1)}.
Mat branch_operator(const ProtocolTree& tree, const NodePath& path);

/// All leaves in depth-first order, child order as stored.
std::vector<NodePath> leaf_paths(const ProtocolTree& tree);

/// p(mu, leaf) = tr(A_leaf gamma_mu A_leaf^dag), columns in leaf order.
OutcomeDistribution simulate(const ProtocolTree& tree,
                             const WeightedStateFamily& family);

/// Flatten to the POVM with effects A_leaf^dag A_leaf.
Povm as_povm(const ProtocolTree& tree);

}  // namespace locc
