#include "locc/io.hpp"

#include "locc/certify.hpp"
#include "test_support.hpp"

#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace locc;
using testutil::Rng;

namespace {

namespace fs = std::filesystem;

/// Fresh scratch directory per test run; contents are overwritten freely.
fs::path scratch() {
  fs::path dir = fs::temp_directory_path() / "locclab_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("states round-trip byte for byte") {
  fs::path a = scratch() / "family_a.json";
  fs::path b = scratch() / "family_b.json";
  WeightedStateFamily family = closed_form_family();
  save_states(family, a.string());
  std::vector<std::string> warnings;
  WeightedStateFamily loaded = load_states(a.string(), &warnings);
  CHECK(warnings.empty());
  save_states(loaded, b.string());
  CHECK(slurp(a) == slurp(b));
  for (int mu = 0; mu < family.size(); ++mu)
    CHECK(op_norm(loaded.states[mu] - family.states[mu]) == 0.0);
}

TEST_CASE("protocols round-trip byte for byte") {
  Rng rng(101);
  fs::path a = scratch() / "tree_a.json";
  fs::path b = scratch() / "tree_b.json";
  ProtocolTree tree = testutil::random_tree(rng, HilbertStructure({2, 2}));
  save_protocol(tree, a.string());
  ProtocolTree loaded = load_protocol(a.string());
  save_protocol(loaded, b.string());
  CHECK(slurp(a) == slurp(b));
  CHECK(validate(loaded).ok(1e-8));
}

TEST_CASE("povms round-trip byte for byte") {
  Rng rng(102);
  fs::path a = scratch() / "povm_a.json";
  fs::path b = scratch() / "povm_b.json";
  Povm povm = testutil::povm(rng, HilbertStructure({2, 2}), 3);
  save_povm(povm, a.string());
  Povm loaded = load_povm(a.string());
  save_povm(loaded, b.string());
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("product operators round-trip byte for byte") {
  fs::path a = scratch() / "cert_a.json";
  fs::path b = scratch() / "cert_b.json";
  save_product_operator(closed_form_certificate(0.6), a.string());
  save_product_operator(load_product_operator(a.string()), b.string());
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("bases round-trip byte for byte") {
  fs::path a = scratch() / "basis_a.json";
  fs::path b = scratch() / "basis_b.json";
  save_basis(testutil::domino_basis(), a.string());
  std::vector<std::string> warnings;
  save_basis(load_basis(a.string(), &warnings), b.string());
  CHECK(warnings.empty());
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("file kinds are sniffed from the top-level keys") {
  fs::path dir = scratch();
  save_states(closed_form_family(), (dir / "kind_states.json").string());
  save_protocol(testutil::perfect_fixture_protocol(),
                (dir / "kind_tree.json").string());
  save_product_operator(closed_form_certificate(0.5),
                        (dir / "kind_cert.json").string());
  save_basis(testutil::domino_basis(), (dir / "kind_basis.json").string());
  CHECK(sniff_kind((dir / "kind_states.json").string()) == FileKind::States);
  CHECK(sniff_kind((dir / "kind_tree.json").string()) == FileKind::Protocol);
  CHECK(sniff_kind((dir / "kind_cert.json").string()) == FileKind::ProductOp);
  CHECK(sniff_kind((dir / "kind_basis.json").string()) == FileKind::Basis);

  Rng rng(103);
  save_povm(testutil::povm(rng, HilbertStructure({2}), 2),
            (dir / "kind_povm.json").string());
  CHECK(sniff_kind((dir / "kind_povm.json").string()) == FileKind::Povm);
}

TEST_CASE("malformed files raise parse errors") {
  fs::path bad = scratch() / "bad.json";
  spit(bad, "{ not json");
  CHECK_THROWS_AS((void)load_states(bad.string()), ParseError);
  CHECK_THROWS_AS((void)load_states((scratch() / "absent.json").string()),
                  ParseError);
}

TEST_CASE("states files demand consistent priors and unit vectors") {
  fs::path partial = scratch() / "partial_priors.json";
  spit(partial, R"({"dims": [2], "states": [
    {"prior": 0.5, "vector": [[1, 0], [0, 0]]},
    {"vector": [[0, 0], [1, 0]]}]})");
  CHECK_THROWS_AS((void)load_states(partial.string()), ParseError);

  fs::path lopsided = scratch() / "long_vector.json";
  spit(lopsided, R"({"dims": [2], "states": [
    {"vector": [[2, 0], [0, 0]]},
    {"vector": [[0, 0], [1, 0]]}]})");
  CHECK_THROWS_AS((void)load_states(lopsided.string()), ParseError);

  fs::path slightly = scratch() / "near_unit.json";
  spit(slightly, R"({"dims": [2], "states": [
    {"vector": [[1.0000001, 0], [0, 0]]},
    {"vector": [[0, 0], [1, 0]]}]})");
  std::vector<std::string> warnings;
  WeightedStateFamily family = load_states(slightly.string(), &warnings);
  CHECK(!warnings.empty());
  CHECK(family.states[0](0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equal priors are filled in when omitted") {
  fs::path file = scratch() / "no_priors.json";
  spit(file, R"({"dims": [2], "states": [
    {"vector": [[1, 0], [0, 0]]},
    {"vector": [[0, 0], [1, 0]]}]})");
  WeightedStateFamily family = load_states(file.string());
  CHECK(family.priors[0] == doctest::Approx(0.5));
  CHECK(family.priors[1] == doctest::Approx(0.5));
}

TEST_CASE("protocol files must validate on load") {
  fs::path file = scratch() / "incomplete_tree.json";
  spit(file, R"({"dims": [2, 2], "tree": {"children": [
    {"party": 0, "op": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]], "children": []}
  ]}})");
  CHECK_THROWS_AS((void)load_protocol(file.string()), ParseError);
}

TEST_CASE("povm files must be complete") {
  fs::path file = scratch() / "incomplete_povm.json";
  spit(file, R"({"dims": [2], "effects": [
    [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]]})");
  CHECK_THROWS_AS((void)load_povm(file.string()), ParseError);
}

TEST_CASE("digests are stable and content sensitive") {
  fs::path file = scratch() / "digest.json";
  spit(file, "{\"dims\": [2]}\n");
  std::string first = file_digest(file.string());
  CHECK(first.size() == 16);
  CHECK(first == file_digest(file.string()));
  spit(file, "{\"dims\": [3]}\n");
  CHECK(first != file_digest(file.string()));
}

TEST_CASE("matrix serialization uses re/im pairs in row-major order") {
  Mat m(1, 2);
  m(0, 0) = Cx(1.5, -2.0);
  m(0, 1) = Cx(0.0, 3.0);
  nlohmann::json j = matrix_json(m);
  CHECK(j[0][0][0].get<double>() == 1.5);
  CHECK(j[0][0][1].get<double>() == -2.0);
  CHECK(j[0][1][0].get<double>() == 0.0);
  CHECK(j[0][1][1].get<double>() == 3.0);
}

}
