#include "locc/protocol.hpp"

#include <cmath>

namespace locc {

ProtocolTree root_only_tree(const HilbertStructure& h) {
  ProtocolTree tree;
  tree.structure = h;
  tree.root.op = identity(h.total_dim());
  return tree;
}

ProtocolNode local_node(const HilbertStructure& h, int party, const Mat& local) {
  ProtocolNode node;
  node.party = party;
  node.op = embed_local(h, party, local);
  return node;
}

namespace {

void validate_node(const HilbertStructure& h, const ProtocolNode& node,
                   NodePath& path, double tol, ValidationReport& report) {
  if (!node.children.empty()) {
    const int n = h.total_dim();
    Mat sum = Mat::Zero(n, n);
    int party = node.children.front().party;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const ProtocolNode& child = node.children[i];
      sum += child.op.adjoint() * child.op;
      if (child.party != party) {
        path.push_back(static_cast<int>(i));
        report.issues.push_back({path, "children act on different parties", 0.0});
        path.pop_back();
      }
      if (child.party < 0 || child.party >= h.parties()) {
        path.push_back(static_cast<int>(i));
        report.issues.push_back({path, "party index out of range", 0.0});
        path.pop_back();
        continue;
      }
      Mat local = extract_local(h, child.party, child.op);
      double locality = op_norm(child.op - embed_local(h, child.party, local));
      if (locality > report.worst_locality_residual)
        report.worst_locality_residual = locality;
      if (locality > tol) {
        path.push_back(static_cast<int>(i));
        report.issues.push_back({path, "operator is not local on its party", locality});
        path.pop_back();
      }
    }
    double completeness = op_norm(sum - identity(n));
    if (completeness > report.worst_completeness_residual)
      report.worst_completeness_residual = completeness;
    if (completeness > tol)
      report.issues.push_back({path, "children are not a complete instrument",
                               completeness});
  }
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    validate_node(h, node.children[i], path, tol, report);
    path.pop_back();
  }
}

}  // namespace

ValidationReport validate(const ProtocolTree& tree, double tol) {
  ValidationReport report;
  NodePath path;
  validate_node(tree.structure, tree.root, path, tol, report);
  return report;
}

const ProtocolNode& node_at(const ProtocolTree& tree, const NodePath& path) {
  const ProtocolNode* node = &tree.root;
  for (int step : path) {
    if (step < 0 || step >= static_cast<int>(node->children.size()))
      throw std::out_of_range("node_at: path leaves the tree");
    node = &node->children[step];
  }
  return *node;
}

Mat branch_operator(const ProtocolTree& tree, const NodePath& path) {
  Mat acc = identity(tree.structure.total_dim());
  const ProtocolNode* node = &tree.root;
  for (int step : path) {
    node = &node->children.at(step);
    acc = node->op * acc;
  }
  return acc;
}

namespace {

void collect_leaves(const ProtocolNode& node, NodePath& path,
                    std::vector<NodePath>& out) {
  if (node.is_leaf()) {
    out.push_back(path);
    return;
  }
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    collect_leaves(node.children[i], path, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<NodePath> leaf_paths(const ProtocolTree& tree) {
  std::vector<NodePath> out;
  NodePath path;
  collect_leaves(tree.root, path, out);
  return out;
}

OutcomeDistribution simulate(const ProtocolTree& tree,
                             const WeightedStateFamily& family) {
  if (tree.structure.total_dim() != family.structure.total_dim())
    throw std::invalid_argument("simulate: dimension mismatch");
  std::vector<NodePath> leaves = leaf_paths(tree);
  Eigen::MatrixXd table(family.size(), leaves.size());
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    Mat branch = branch_operator(tree, leaves[k]);
    for (int mu = 0; mu < family.size(); ++mu)
      table(mu, static_cast<int>(k)) =
          (branch * family.weighted(mu) * branch.adjoint()).trace().real();
  }
  table = table.cwiseMax(0.0);
  return OutcomeDistribution(table);
}

Povm as_povm(const ProtocolTree& tree) {
  Povm out{tree.structure, {}};
  for (const NodePath& path : leaf_paths(tree)) {
    Mat branch = branch_operator(tree, path);
    out.effects.push_back(branch.adjoint() * branch);
  }
  return out;
}

}  // namespace locc
