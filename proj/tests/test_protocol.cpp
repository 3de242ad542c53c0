#include "locc/protocol.hpp"

#include "test_support.hpp"

#include "doctest.h"

using namespace locc;
using testutil::Rng;

TEST_SUITE("protocol") {

TEST_CASE("root-only tree validates and simulates trivially") {
  HilbertStructure h({2, 2});
  ProtocolTree tree = root_only_tree(h);
  CHECK(validate(tree).ok());

  WeightedStateFamily family = testutil::two_state_fixture();
  OutcomeDistribution p = simulate(tree, family);
  REQUIRE(p.outcomes() == 1);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("one projective round validates") {
  CHECK(validate(testutil::perfect_fixture_protocol()).ok());
}

TEST_CASE("incomplete children are flagged, not thrown") {
  HilbertStructure h({2, 2});
  ProtocolTree tree = root_only_tree(h);
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 0.9;
  tree.root.children.push_back(local_node(h, 0, p0));
  tree.root.children.push_back(local_node(h, 0, p1));
  ValidationReport report = validate(tree);
  CHECK_FALSE(report.ok());
  CHECK(report.worst_completeness_residual > 0.1);
  CHECK_FALSE(report.issues.empty());
}

TEST_CASE("mixed-party children are flagged") {
  Rng rng(61);
  HilbertStructure h({2, 2});
  ProtocolTree tree = root_only_tree(h);
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  tree.root.children.push_back(local_node(h, 0, p0));
  tree.root.children.push_back(local_node(h, 1, p1));
  CHECK_FALSE(validate(tree).ok());
}

TEST_CASE("branch operators multiply in reversed order") {
  Rng rng(62);
  HilbertStructure h({2, 2});
  ProtocolTree tree = root_only_tree(h);
  CHECK(op_norm(branch_operator(tree, {}) - identity(4)) == 0.0);

  KrausInstrument first = testutil::instrument(rng, HilbertStructure({2}), 2);
  for (const Mat& op : first.kraus_ops)
    tree.root.children.push_back(local_node(h, 0, op));
  KrausInstrument second = testutil::instrument(rng, HilbertStructure({2}), 2);
  for (const Mat& op : second.kraus_ops)
    tree.root.children[0].children.push_back(local_node(h, 1, op));

  Mat a = embed_local(h, 0, first.kraus_ops[0]);
  Mat b = embed_local(h, 1, second.kraus_ops[1]);
  CHECK(op_norm(branch_operator(tree, {0}) - a) < 1e-14);
  CHECK(op_norm(branch_operator(tree, {0, 1}) - b * a) < 1e-13);
}

TEST_CASE("node lookup rejects bad paths") {
  ProtocolTree tree = testutil::perfect_fixture_protocol();
  CHECK(node_at(tree, {1}).is_leaf());
  CHECK_THROWS_AS((void)node_at(tree, {2}), std::out_of_range);
  CHECK_THROWS_AS((void)node_at(tree, {0, 0}), std::out_of_range);
}

TEST_CASE("leaves come in depth-first order") {
  Rng rng(63);
  ProtocolTree tree = testutil::random_tree(rng, HilbertStructure({2, 2}));
  std::vector<NodePath> leaves = leaf_paths(tree);
  REQUIRE(!leaves.empty());
  for (const NodePath& path : leaves) CHECK(node_at(tree, path).is_leaf());
  CHECK(std::is_sorted(leaves.begin(), leaves.end()));
}

TEST_CASE("perfect fixture simulates to a diagonal table") {
  OutcomeDistribution p = simulate(testutil::perfect_fixture_protocol(),
                                   testutil::two_state_fixture());
  CHECK(d_mf(p) == doctest::Approx(0.0));
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("simulation preserves each state's total weight") {
  Rng rng(64);
  for (int trial = 0; trial < 20; ++trial) {
    HilbertStructure h({2, 2});
    ProtocolTree tree = testutil::random_tree(rng, h, 2, 2 + trial % 2);
    WeightedStateFamily family = testutil::mixed_family(rng, h, 2 + trial % 3);
    OutcomeDistribution p = simulate(tree, family);
    for (int mu = 0; mu < family.size(); ++mu) {
      double row = 0.0;
      for (int k = 0; k < p.outcomes(); ++k) row += p(mu, k);
      CHECK(row == doctest::Approx(family.priors[mu]).epsilon(1e-9));
    }
  }
}

TEST_CASE("branch operators factorize over parties") {
  Rng rng(65);
  HilbertStructure h({2, 3});
  ProtocolTree tree = testutil::random_tree(rng, h);
  for (const NodePath& path : leaf_paths(tree)) {
    Mat branch = branch_operator(tree, path);
    // Realign indices so that a tensor product becomes a rank-one matrix:
    // R[(i,j),(k,l)] = branch[(i,k),(j,l)] over party-0 pairs (i,j) and
    // party-1 pairs (k,l). A second singular value would mean the branch
    // entangles the parties.
    const int d0 = h.dim(0), d1 = h.dim(1);
    Mat realigned(d0 * d0, d1 * d1);
    for (int i = 0; i < d0; ++i)
      for (int j = 0; j < d0; ++j)
        for (int k = 0; k < d1; ++k)
          for (int l = 0; l < d1; ++l)
            realigned(i * d0 + j, k * d1 + l) =
                branch(h.ravel({i, k}), h.ravel({j, l}));
    Eigen::JacobiSVD<Mat> svd(realigned);
    CHECK(svd.singularValues()(1) <=
          1e-9 * std::max(1.0, svd.singularValues()(0)));
  }
}

TEST_CASE("flattening matches simulation on random trees") {
  Rng rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    HilbertStructure h({2, 2});
    ProtocolTree tree = testutil::random_tree(rng, h);
    WeightedStateFamily family = testutil::pure_family(rng, h, 3);
    OutcomeDistribution direct = simulate(tree, family);
    OutcomeDistribution flat = outcome_distribution(as_povm(tree), family);
    REQUIRE(direct.outcomes() == flat.outcomes());
    for (int mu = 0; mu < family.size(); ++mu)
      for (int k = 0; k < direct.outcomes(); ++k)
        CHECK(direct(mu, k) == doctest::Approx(flat(mu, k)).epsilon(1e-9));
  }
}

TEST_CASE("as_povm of the perfect fixture returns the projectors") {
  Povm povm = as_povm(testutil::perfect_fixture_protocol());
  REQUIRE(povm.outcomes() == 2);
  CHECK(check_povm(povm).ok());
  HilbertStructure h({2, 2});
  Mat p0 = Mat::Zero(2, 2);
  p0(0, 0) = 1.0;
  CHECK(op_norm(povm.effects[0] - embed_local(h, 0, p0)) < 1e-12);
}

}
