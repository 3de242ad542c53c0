#pragma once

#include "locc/basis.hpp"
#include "locc/splitting.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>

namespace locc {

/// Complex entries as [re, im]; matrices as row-major nested arrays.
nlohmann::json matrix_json(const Mat& m);
nlohmann::json vector_json(const CVec& v);

/// Malformed or inconsistent input file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FileKind { States, Protocol, Povm, ProductOp, Basis, Unknown };

/// Classify a JSON file by its top-level keys.
FileKind sniff_kind(const std::string& path);

/// States file: {"dims": [...], "states": [{"prior"?, "vector" | "density"}]}.
/// Vectors off unit norm by up to 1e-6 are renormalized with a warning;
/// densities are symmetrized and trace-normalized within the same band.
WeightedStateFamily load_states(const std::string& path,
                                std::vector<std::string>* warnings = nullptr);
void save_states(const WeightedStateFamily& family, const std::string& path);

/// Protocol file: {"dims": [...], "tree": {"party", "op", "children"}} with
/// per-party local operators; the root omits party and op. Loaded trees
/// must pass validation.
ProtocolTree load_protocol(const std::string& path);
void save_protocol(const ProtocolTree& tree, const std::string& path);

/// POVM file: {"dims": [...], "effects": [full-space matrices]}; effects
/// must be complete to 1e-6.
Povm load_povm(const std::string& path);
void save_povm(const Povm& povm, const std::string& path);

/// Product operator file: {"dims": [...], "factors": [per-party matrices]}.
/// Factors are only required to be Hermitian; positivity is the verifier's
/// business.
ProductOperator load_product_operator(const std::string& path);
void save_product_operator(const ProductOperator& op, const std::string& path);

/// Basis file: {"dims": [...], "vectors": [[per-party local vectors]]}.
ProductBasis load_basis(const std::string& path,
                        std::vector<std::string>* warnings = nullptr);
void save_basis(const ProductBasis& basis, const std::string& path);

/// FNV-1a hash of the raw file bytes, 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace locc
