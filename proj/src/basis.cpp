#include "locc/basis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace locc {

BasisReport check_basis(const ProductBasis& basis) {
  BasisReport report;
  report.complete = basis.size() == basis.structure.total_dim();
  std::vector<CVec> globals;
  globals.reserve(basis.size());
  for (int mu = 0; mu < basis.size(); ++mu) {
    if (static_cast<int>(basis.vectors[mu].size()) != basis.structure.parties())
      throw std::invalid_argument("check_basis: factor count mismatch");
    for (int r = 0; r < basis.structure.parties(); ++r) {
      if (basis.vectors[mu][r].size() != basis.structure.dim(r))
        throw std::invalid_argument("check_basis: factor dimension mismatch");
      report.worst_norm_residual =
          std::max(report.worst_norm_residual,
                   std::abs(basis.vectors[mu][r].norm() - 1.0));
    }
    globals.push_back(basis.global(mu));
  }
  for (int mu = 0; mu < basis.size(); ++mu)
    for (int nu = mu + 1; nu < basis.size(); ++nu)
      report.max_cross_overlap =
          std::max(report.max_cross_overlap,
                   std::abs((globals[mu].adjoint() * globals[nu])(0)));
  return report;
}

std::vector<std::vector<int>> orthogonality_components(
    const ProductBasis& basis, int party, const std::vector<int>& indices,
    double tol) {
  if (indices.empty())
    throw std::invalid_argument("orthogonality_components: empty index set");
  if (party < 0 || party >= basis.structure.parties())
    throw std::invalid_argument("orthogonality_components: party out of range");

  const int n = static_cast<int>(indices.size());
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> components;
  for (int i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    std::vector<int> component;
    std::vector<int> stack{i};
    label[i] = static_cast<int>(components.size());
    while (!stack.empty()) {
      int j = stack.back();
      stack.pop_back();
      component.push_back(indices[j]);
      const CVec& v = basis.vectors.at(indices[j]).at(party);
      for (int k = 0; k < n; ++k) {
        if (label[k] >= 0) continue;
        const CVec& w = basis.vectors.at(indices[k]).at(party);
        if (std::abs((v.adjoint() * w)(0)) > tol) {
          label[k] = label[i];
          stack.push_back(k);
        }
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

namespace {

// Projector onto the span of the chosen local vectors, rank decided by a
// singular value cut well above the orthogonality tolerance.
Mat span_projector(const ProductBasis& basis, int party,
                   const std::vector<int>& members) {
  const int d = basis.structure.dim(party);
  Mat columns(d, static_cast<int>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i)
    columns.col(static_cast<int>(i)) = basis.vectors[members[i]][party];
  Eigen::JacobiSVD<Mat> svd(columns, Eigen::ComputeThinU);
  Mat proj = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) <= 1e-7) break;
    proj += svd.matrixU().col(i) * svd.matrixU().col(i).adjoint();
  }
  return proj;
}

// Grows the protocol below `node` until every surviving index set is a
// singleton; returns the first subset no party can separate, if any.
std::optional<std::vector<int>> grow(const ProductBasis& basis,
                                     ProtocolNode& node,
                                     const std::vector<int>& indices,
                                     double tol) {
  if (indices.size() == 1) return std::nullopt;

  for (int party = 0; party < basis.structure.parties(); ++party) {
    std::vector<std::vector<int>> components =
        orthogonality_components(basis, party, indices, tol);
    if (components.size() < 2) continue;

    const int d = basis.structure.dim(party);
    Mat covered = Mat::Zero(d, d);
    for (const std::vector<int>& component : components) {
      Mat proj = span_projector(basis, party, component);
      covered += proj;
      node.children.push_back(local_node(basis.structure, party, proj));
    }
    // Instrument completeness needs the unused local subspace too; it
    // absorbs zero probability and stays a dead leaf.
    Mat rest = identity(d) - covered;
    if (op_norm(rest) > 1e-7)
      node.children.push_back(local_node(basis.structure, party, rest));

    for (std::size_t c = 0; c < components.size(); ++c)
      if (auto witness = grow(basis, node.children[c], components[c], tol))
        return witness;
    return std::nullopt;
  }
  return indices;
}

}  // namespace

DissectionResult dissect(const ProductBasis& basis, double tol) {
  if (basis.size() == 0)
    throw std::invalid_argument("dissect: empty basis");
  BasisReport health = check_basis(basis);
  if (!health.complete)
    throw std::invalid_argument("dissect: basis does not span the space");
  if (health.worst_norm_residual > 1e-8 || health.max_cross_overlap > 1e-8)
    throw std::invalid_argument("dissect: basis is not orthonormal");

  DissectionResult result;
  result.protocol = root_only_tree(basis.structure);
  std::vector<int> all(basis.size());
  for (int mu = 0; mu < basis.size(); ++mu) all[mu] = mu;

  if (auto witness = grow(basis, result.protocol.root, all, tol)) {
    result.decision = Discriminability::NotDiscriminable;
    result.witness = std::move(*witness);
    result.protocol = root_only_tree(basis.structure);
  } else {
    result.decision = Discriminability::FiniteDiscriminable;
  }
  return result;
}

ProtocolTree emit_protocol(const DissectionResult& result) {
  if (result.decision != Discriminability::FiniteDiscriminable)
    throw std::logic_error("emit_protocol: basis is not discriminable");
  return result.protocol;
}

}  // namespace locc
