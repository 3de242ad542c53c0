#include "locc/io.hpp"

#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

// Writes the fixture files the CLI tests shell out with. Everything is
// produced through the library's own serializers so the files stay in lock
// step with the format.

using namespace locc;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <directory>\n";
    return 1;
  }
  std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const auto at = [&dir](const char* name) { return (dir / name).string(); };

  save_states(closed_form_family(), at("closed_form_states.json"));
  save_states(testutil::two_state_fixture(), at("two_state.json"));
  save_protocol(testutil::perfect_fixture_protocol(),
                at("perfect_protocol.json"));

  {
    // Single pure qubit pair: |0> against |+>, equal priors.
    WeightedStateFamily pair;
    pair.structure = HilbertStructure({2});
    CVec zero = CVec::Zero(2);
    zero(0) = 1.0;
    CVec plus(2);
    plus(0) = plus(1) = 1.0 / std::sqrt(2.0);
    pair.states = {zero * zero.adjoint(), plus * plus.adjoint()};
    pair.priors = {0.5, 0.5};
    save_states(pair, at("qubit_pair.json"));
  }
  {
    Povm trivial = trivial_povm(HilbertStructure({2, 2}));
    save_povm(trivial, at("trivial_povm.json"));
  }
  {
    Povm comp;
    comp.structure = HilbertStructure({2});
    Mat p0 = Mat::Zero(2, 2);
    p0(0, 0) = 1.0;
    Mat p1 = Mat::Zero(2, 2);
    p1(1, 1) = 1.0;
    comp.effects = {p0, p1};
    save_povm(comp, at("computational_povm.json"));
  }

  save_basis(testutil::domino_basis(), at("domino.json"));
  save_basis(testutil::computational_basis(HilbertStructure({2, 2})),
             at("computational_22.json"));

  std::ofstream bad(at("malformed.json"), std::ios::binary);
  bad << "{ not json";
  return 0;
}
