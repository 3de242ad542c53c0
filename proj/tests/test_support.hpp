#pragma once

#include "locc/basis.hpp"
#include "locc/certify.hpp"
#include "locc/splitting.hpp"

#include <random>

// Seeded generators shared by the unit and acceptance suites. Everything
// here is deterministic in the engine state so failures replay exactly.

namespace testutil {

using locc::CVec;
using locc::Cx;
using locc::Mat;

using Rng = std::mt19937_64;

inline Cx gaussian(Rng& rng) {
  std::normal_distribution<double> n;
  double re = n(rng);
  double im = n(rng);
  return {re, im};
}

inline Mat gaussian_matrix(Rng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = gaussian(rng);
  return m;
}

inline CVec unit_vector(Rng& rng, int dim) {
  CVec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = gaussian(rng);
  return v / v.norm();
}

/// Haar-distributed unitary from the QR decomposition with the phase fix
/// that makes the factorization unique.
inline Mat unitary(Rng& rng, int dim) {
  Mat g = gaussian_matrix(rng, dim, dim);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    Cx d = r(i, i);
    q.col(i) *= std::abs(d) > 0.0 ? d / std::abs(d) : Cx(1.0, 0.0);
  }
  return q;
}

inline Mat psd(Rng& rng, int dim) {
  Mat g = gaussian_matrix(rng, dim, dim);
  Mat p = g * g.adjoint();
  return p;
}

inline Mat density(Rng& rng, int dim) {
  Mat p = psd(rng, dim);
  return p / p.trace().real();
}

/// Random POVM: positive seeds G_k whitened by the inverse square root of
/// their sum, so completeness holds at machine precision.
inline locc::Povm povm(Rng& rng, const locc::HilbertStructure& h,
                       int outcomes) {
  const int dim = h.total_dim();
  std::vector<Mat> seeds;
  Mat total = Mat::Zero(dim, dim);
  for (int k = 0; k < outcomes; ++k) {
    seeds.push_back(psd(rng, dim));
    total += seeds.back();
  }
  Mat white = locc::inv_sqrt_psd(total);
  locc::Povm out;
  out.structure = h;
  for (const Mat& g : seeds) out.effects.push_back(white * g * white);
  return out;
}

/// Random instrument A_k = U_k sqrt(E_k) over a random POVM; the unitary
/// parts keep the polar pieces nontrivial.
inline locc::KrausInstrument instrument(Rng& rng,
                                        const locc::HilbertStructure& h,
                                        int outcomes) {
  locc::Povm effects = povm(rng, h, outcomes);
  locc::KrausInstrument inst;
  inst.structure = h;
  for (const Mat& e : effects.effects)
    inst.kraus_ops.push_back(unitary(rng, h.total_dim()) *
                             locc::sqrt_psd(e, 1e-8));
  return inst;
}

inline locc::WeightedStateFamily pure_family(Rng& rng,
                                             const locc::HilbertStructure& h,
                                             int count) {
  std::vector<Mat> states;
  for (int mu = 0; mu < count; ++mu) {
    CVec v = unit_vector(rng, h.total_dim());
    states.push_back(v * v.adjoint());
  }
  return locc::WeightedStateFamily::equal_priors(h, std::move(states));
}

inline locc::WeightedStateFamily mixed_family(Rng& rng,
                                              const locc::HilbertStructure& h,
                                              int count) {
  locc::WeightedStateFamily family;
  family.structure = h;
  double sum = 0.0;
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (int mu = 0; mu < count; ++mu) {
    family.states.push_back(density(rng, h.total_dim()));
    family.priors.push_back(u(rng));
    sum += family.priors.back();
  }
  for (double& p : family.priors) p /= sum;
  return family;
}

/// Nonnegative table normalized to total one.
inline locc::OutcomeDistribution table(Rng& rng, int states, int outcomes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd t(states, outcomes);
  for (int r = 0; r < states; ++r)
    for (int c = 0; c < outcomes; ++c) t(r, c) = u(rng);
  return locc::OutcomeDistribution(t / t.sum());
}

/// Column-stochastic post-processing matrix, `merged` rows over `outcomes`
/// columns.
inline Eigen::MatrixXd stochastic(Rng& rng, int merged, int outcomes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd pi(merged, outcomes);
  for (int c = 0; c < outcomes; ++c) {
    double sum = 0.0;
    for (int r = 0; r < merged; ++r) {
      pi(r, c) = u(rng);
      sum += pi(r, c);
    }
    for (int r = 0; r < merged; ++r) pi(r, c) /= sum;
  }
  return pi;
}

/// One local measurement round below `node`: a complete Kraus family on a
/// random party, embedded into the full space.
inline void attach_round(Rng& rng, const locc::HilbertStructure& h,
                         locc::ProtocolNode& node, int outcomes) {
  std::uniform_int_distribution<int> pick(0, h.parties() - 1);
  const int party = pick(rng);
  locc::HilbertStructure local({h.dim(party)});
  locc::KrausInstrument inst = instrument(rng, local, outcomes);
  for (const Mat& op : inst.kraus_ops)
    node.children.push_back(locc::local_node(h, party, op));
}

/// Random valid protocol: one round at the root, then a second round under
/// each child with probability one half.
inline locc::ProtocolTree random_tree(Rng& rng,
                                      const locc::HilbertStructure& h,
                                      int max_depth = 2, int outcomes = 2) {
  locc::ProtocolTree tree = locc::root_only_tree(h);
  attach_round(rng, h, tree.root, outcomes);
  if (max_depth >= 2) {
    std::bernoulli_distribution coin(0.5);
    for (locc::ProtocolNode& child : tree.root.children)
      if (coin(rng)) attach_round(rng, h, child, outcomes);
  }
  return tree;
}

/// The two-state fixture {|00>, |10>} with equal priors.
inline locc::WeightedStateFamily two_state_fixture() {
  locc::HilbertStructure h({2, 2});
  CVec a = CVec::Zero(4), b = CVec::Zero(4);
  a(0) = 1.0;
  b(2) = 1.0;
  return locc::WeightedStateFamily::equal_priors(
      h, {a * a.adjoint(), b * b.adjoint()});
}

/// One computational round on party 0, which discriminates the fixture
/// states perfectly.
inline locc::ProtocolTree perfect_fixture_protocol() {
  locc::HilbertStructure h({2, 2});
  locc::ProtocolTree tree = locc::root_only_tree(h);
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  tree.root.children.push_back(locc::local_node(h, 0, p0));
  tree.root.children.push_back(locc::local_node(h, 0, p1));
  return tree;
}

/// Computational product basis: one index tuple per global dimension.
inline locc::ProductBasis computational_basis(
    const locc::HilbertStructure& h) {
  locc::ProductBasis basis;
  basis.structure = h;
  for (int index = 0; index < h.total_dim(); ++index) {
    std::vector<int> digits = h.unravel(index);
    std::vector<CVec> locals;
    for (int r = 0; r < h.parties(); ++r) {
      CVec v = CVec::Zero(h.dim(r));
      v(digits[r]) = 1.0;
      locals.push_back(std::move(v));
    }
    basis.vectors.push_back(std::move(locals));
  }
  return basis;
}

/// The nine-state two-qutrit domino basis, the standard example of a
/// complete product basis with no LOCC discrimination protocol.
inline locc::ProductBasis domino_basis() {
  locc::ProductBasis basis;
  basis.structure = locc::HilbertStructure({3, 3});
  auto e = [](int i) {
    CVec v = CVec::Zero(3);
    v(i) = 1.0;
    return v;
  };
  auto pm = [&](int i, int j, double sign) {
    CVec v = (e(i) + sign * e(j)) / std::sqrt(2.0);
    return v;
  };
  auto add = [&](const CVec& a, const CVec& b) {
    basis.vectors.push_back({a, b});
  };
  add(e(1), e(1));
  add(e(0), pm(0, 1, +1.0));
  add(e(0), pm(0, 1, -1.0));
  add(e(2), pm(1, 2, +1.0));
  add(e(2), pm(1, 2, -1.0));
  add(pm(1, 2, +1.0), e(0));
  add(pm(1, 2, -1.0), e(0));
  add(pm(0, 1, +1.0), e(2));
  add(pm(0, 1, -1.0), e(2));
  return basis;
}

/// Same basis after a fixed per-party local rotation; decisions must not
/// change under this map.
inline locc::ProductBasis rotate_basis(Rng& rng,
                                       const locc::ProductBasis& basis) {
  std::vector<Mat> rotations;
  for (int r = 0; r < basis.structure.parties(); ++r)
    rotations.push_back(unitary(rng, basis.structure.dim(r)));
  locc::ProductBasis out;
  out.structure = basis.structure;
  for (const std::vector<CVec>& locals : basis.vectors) {
    std::vector<CVec> rotated;
    for (int r = 0; r < basis.structure.parties(); ++r)
      rotated.push_back(rotations[r] * locals[r]);
    out.vectors.push_back(std::move(rotated));
  }
  return out;
}

}  // namespace testutil
