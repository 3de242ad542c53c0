#include "locc/splitting.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>

namespace locc {

namespace {

constexpr double kBracketCap = 1e12;

double branch_deviation(DeviationKind kind, const WeightedStateFamily& family,
                        const Mat& branch) {
  return conditional_deviation(kind, trivial_povm(family.structure), family,
                               branch);
}

void check_config(const SplitConfig& config, const WeightedStateFamily& family) {
  if (config.level_tol <= 0.0 || config.b_max <= 0.0 || config.max_bisect <= 0)
    throw std::invalid_argument("split: tolerances must be positive");
  double ceiling = deviation(
      config.kind, outcome_distribution(trivial_povm(family.structure), family));
  if (!(config.delta > 0.0) || !(config.delta < ceiling))
    throw std::invalid_argument(
        "split: delta must lie strictly between 0 and the trivial deviation");
}

// Root of g(b) = deviation after sqrt(b 1 + E) on top of the branch. The
// overall scale of the operator drops out of the conditioning, so the
// normalization of the eventual pseudo-weak instrument can be ignored.
double solve_b(const Mat& child_op, const Mat& branch, const SplitConfig& config,
               const WeightedStateFamily& family) {
  const Mat effect = child_op.adjoint() * child_op;
  const Mat one = identity(static_cast<int>(effect.rows()));
  auto g = [&](double b) {
    return branch_deviation(config.kind, family,
                            sqrt_psd(b * one + effect) * branch);
  };

  double g0 = g(0.0);
  if (g0 >= config.delta - config.level_tol) {
    if (g0 <= config.delta + config.level_tol) return 0.0;
    throw std::invalid_argument("find_b: child deviation is not below delta");
  }

  double hi = config.b_max;
  while (g(hi) < config.delta) {
    hi *= 2.0;
    if (hi > kBracketCap)
      throw std::runtime_error(
          "find_b: no bracket below b = 1e12; deviation did not recover");
  }

  double lo = 0.0;
  for (int i = 0; i < config.max_bisect; ++i) {
    double mid = 0.5 * (lo + hi);
    double value = g(mid);
    if (std::abs(value - config.delta) <= config.level_tol) return mid;
    (value < config.delta ? lo : hi) = mid;
  }
  throw std::runtime_error("find_b: bisection stalled before level_tol");
}

// Working copy of the tree; origin is the original leaf index when the
// node is a leaf, -1 otherwise. Reattached subtree copies keep their
// origins, which is what makes the forget map a 0/1 merge.
struct WorkNode {
  int party = -1;
  Mat op;
  std::vector<WorkNode> children;
  int origin = -1;
};

WorkNode adopt(const ProtocolNode& node, int& next_leaf) {
  WorkNode out;
  out.party = node.party;
  out.op = node.op;
  if (node.is_leaf()) {
    out.origin = next_leaf++;
    return out;
  }
  out.children.reserve(node.children.size());
  for (const ProtocolNode& child : node.children)
    out.children.push_back(adopt(child, next_leaf));
  return out;
}

ProtocolNode emit(const WorkNode& node, std::vector<int>* leaf_origins) {
  ProtocolNode out;
  out.party = node.party;
  out.op = node.op;
  if (node.children.empty()) {
    if (leaf_origins) leaf_origins->push_back(node.origin);
    return out;
  }
  out.children.reserve(node.children.size());
  for (const WorkNode& child : node.children)
    out.children.push_back(emit(child, leaf_origins));
  return out;
}

struct Selection {
  WorkNode* node = nullptr;
  Mat branch;
  std::vector<int> below;  // children under delta - level_tol
};

// Breadth-first, leftmost node whose branch stays above delta + level_tol
// throughout while at least one child drops below delta - level_tol.
// Nodes already at the boundary shield their subtrees from selection.
Selection select_node(WorkNode& root, const Mat& one, const SplitConfig& config,
                      const WeightedStateFamily& family) {
  struct Entry {
    WorkNode* node;
    Mat branch;
  };
  std::deque<Entry> queue;
  queue.push_back({&root, one});
  while (!queue.empty()) {
    Entry entry = std::move(queue.front());
    queue.pop_front();
    double here = branch_deviation(config.kind, family, entry.branch);
    if (here <= config.delta + config.level_tol) continue;

    Selection picked{entry.node, entry.branch, {}};
    for (std::size_t c = 0; c < entry.node->children.size(); ++c) {
      Mat child_branch = entry.node->children[c].op * entry.branch;
      if (branch_deviation(config.kind, family, child_branch) <
          config.delta - config.level_tol)
        picked.below.push_back(static_cast<int>(c));
      queue.push_back({&entry.node->children[c], std::move(child_branch)});
    }
    if (!picked.below.empty()) return picked;
  }
  return {};
}

// Replaces the children of the selected node by the pseudo-weak round:
// weakened operators for the overshooting children, each followed by the
// recovery level carrying copies of all original subtrees; a plain
// sqrt(beta) rescaling for the rest, which keeps its subtree and thereby
// its conditional deviations.
void apply_round(Selection& sel, const HilbertStructure& h,
                 const SplitConfig& config, const WeightedStateFamily& family) {
  std::vector<WorkNode> old_children = std::move(sel.node->children);
  const int outcomes = static_cast<int>(old_children.size());
  const int party = old_children.front().party;

  PseudoWeakParams params{std::vector<double>(outcomes, 0.0)};
  for (int c : sel.below)
    params.b[c] = solve_b(old_children[c].op, sel.branch, config, family);
  const double scale = std::sqrt(params.beta());

  KrausInstrument round{h, {}, party};
  for (const WorkNode& child : old_children) round.kraus_ops.push_back(child.op);
  PseudoWeakInstrument pw = pseudo_weak_instrument(round, params);

  // Weakened nodes copy every original subtree into their recovery level,
  // so build them all before the kept children are moved out.
  std::vector<WorkNode> weakened;
  weakened.reserve(sel.below.size());
  for (int c : sel.below) {
    WorkNode weak{party, pw.pw.kraus_ops[c], {}, -1};
    weak.children.reserve(outcomes);
    for (int l = 0; l < outcomes; ++l)
      weak.children.push_back({party, pw.recovery[c].kraus_ops[l],
                               old_children[l].children,
                               old_children[l].origin});
    weakened.push_back(std::move(weak));
  }

  std::vector<WorkNode> next;
  next.reserve(old_children.size());
  std::size_t below_at = 0;
  for (int c = 0; c < outcomes; ++c) {
    if (below_at < sel.below.size() && sel.below[below_at] == c) {
      next.push_back(std::move(weakened[below_at]));
      ++below_at;
    } else {
      WorkNode kept = std::move(old_children[c]);
      kept.op = scale * kept.op;
      next.push_back(std::move(kept));
    }
  }
  sel.node->children = std::move(next);
}

ProtocolNode truncate(const WorkNode& node, const Mat& branch,
                      const SplitConfig& config,
                      const WeightedStateFamily& family, NodePath& path,
                      std::vector<NodePath>& s_delta) {
  ProtocolNode out;
  out.party = node.party;
  out.op = node.op;
  double here = branch_deviation(config.kind, family, branch);
  if (std::abs(here - config.delta) <= config.level_tol) {
    s_delta.push_back(path);
    return out;
  }
  out.children.reserve(node.children.size());
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    path.push_back(static_cast<int>(c));
    out.children.push_back(truncate(node.children[c],
                                    node.children[c].op * branch, config,
                                    family, path, s_delta));
    path.pop_back();
  }
  return out;
}

}  // namespace

double node_deviation(const ProtocolTree& tree, const NodePath& path,
                      DeviationKind kind, const WeightedStateFamily& family) {
  return branch_deviation(kind, family, branch_operator(tree, path));
}

std::vector<int> d_delta_set(const ProtocolTree& tree, const NodePath& path,
                             const SplitConfig& config,
                             const WeightedStateFamily& family) {
  const ProtocolNode& node = node_at(tree, path);
  const Mat branch = branch_operator(tree, path);
  std::vector<int> below;
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    double value = branch_deviation(config.kind, family,
                                    node.children[c].op * branch);
    if (value < config.delta - config.level_tol)
      below.push_back(static_cast<int>(c));
  }
  return below;
}

double find_b(const ProtocolTree& tree, const NodePath& path, int child,
              const SplitConfig& config, const WeightedStateFamily& family) {
  const ProtocolNode& node = node_at(tree, path);
  return solve_b(node.children.at(child).op, branch_operator(tree, path),
                 config, family);
}

SplitResult split_protocol(const ProtocolTree& tree, const SplitConfig& config,
                           const WeightedStateFamily& family) {
  check_config(config, family);
  if (tree.structure.total_dim() != family.structure.total_dim())
    throw std::invalid_argument("split: dimension mismatch");
  if (!validate(tree).ok(1e-8))
    throw std::invalid_argument("split: tree is not a valid protocol");

  int original_leaves = 0;
  WorkNode work = adopt(tree.root, original_leaves);
  const Mat one = identity(tree.structure.total_dim());

  SplitResult result;
  for (;;) {
    Selection sel = select_node(work, one, config, family);
    if (!sel.node) break;
    apply_round(sel, tree.structure, config, family);
    ++result.iterations;
  }

  std::vector<int> origins;
  result.modified.structure = tree.structure;
  result.modified.root = emit(work, &origins);

  result.forget_map =
      Eigen::MatrixXd::Zero(original_leaves, static_cast<int>(origins.size()));
  for (std::size_t k = 0; k < origins.size(); ++k) {
    if (origins[k] < 0)
      throw std::logic_error("split: modified leaf without an origin");
    result.forget_map(origins[k], static_cast<int>(k)) = 1.0;
  }

  result.stage_one.structure = tree.structure;
  NodePath path;
  result.stage_one.root =
      truncate(work, one, config, family, path, result.s_delta);
  return result;
}

ResidualReport equivalence_check(const ProtocolTree& original,
                                 const SplitResult& result,
                                 const WeightedStateFamily& family,
                                 double tol) {
  OutcomeDistribution base = simulate(original, family);
  OutcomeDistribution merged =
      post_process(simulate(result.modified, family), result.forget_map);
  if (merged.outcomes() != base.outcomes())
    throw std::invalid_argument("equivalence_check: leaf count mismatch");
  ResidualReport report;
  report.max_residual =
      (merged.table() - base.table()).cwiseAbs().maxCoeff();
  report.ok = report.max_residual <= tol;
  return report;
}

}  // namespace locc
