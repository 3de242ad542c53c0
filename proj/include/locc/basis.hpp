#pragma once

#include "locc/protocol.hpp"

namespace locc {

/// Orthonormal family of product vectors, one local unit vector per party
/// for each index.
struct ProductBasis {
  HilbertStructure structure;
  std::vector<std::vector<CVec>> vectors;  // [index][party]

  int size() const { return static_cast<int>(vectors.size()); }
  CVec global(int mu) const { return tensor_vector(vectors.at(mu)); }
};

struct BasisReport {
  double worst_norm_residual = 0.0;   // local vectors against unit norm
  double max_cross_overlap = 0.0;     // |<global_mu|global_nu>|, mu != nu
  bool complete = false;              // count equals the space dimension

  bool ok(double tol = 1e-9) const {
    return worst_norm_residual <= tol && max_cross_overlap <= tol && complete;
  }
};

BasisReport check_basis(const ProductBasis& basis);

enum class Discriminability { FiniteDiscriminable, NotDiscriminable };

/// Verdict of the dissection. The protocol is meaningful only for a
/// discriminable basis; the witness holds an index subset that no single
/// party can separate when the basis is not.
struct DissectionResult {
  Discriminability decision = Discriminability::NotDiscriminable;
  ProtocolTree protocol;
  std::vector<int> witness;
};

/// Connected components of the given indices under the relation
/// |<omega_mu|omega_nu>| > tol on one party's local vectors. Components
/// are listed by smallest member, members ascending. Any nondisturbing
/// local projective measurement is constant on these components, so they
/// are the finest split party r can contribute.
std::vector<std::vector<int>> orthogonality_components(
    const ProductBasis& basis, int party, const std::vector<int>& indices,
    double tol = 1e-9);

/// Recursive decision procedure: repeatedly project onto the component
/// subspaces of the first party that separates the remaining indices.
/// Requires a complete basis; incomplete families are rejected rather
/// than risk an unsound verdict.
DissectionResult dissect(const ProductBasis& basis, double tol = 1e-9);

/// The discriminating protocol of a successful dissection.
ProtocolTree emit_protocol(const DissectionResult& result);

}  // namespace locc
