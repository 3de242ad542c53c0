#include "locc/io.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace locc {

namespace {

using nlohmann::json;

// Band inside which loaded data is quietly repaired (renormalized,
// symmetrized); anything worse is rejected.
constexpr double kLoadTol = 1e-6;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

HilbertStructure parse_dims(const json& j, const std::string& path) {
  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].empty())
    throw ParseError(path + ": missing dims");
  std::vector<int> dims;
  for (const json& d : j["dims"]) {
    if (!d.is_number_integer() || d.get<int>() < 1)
      throw ParseError(path + ": dims must be positive integers");
    dims.push_back(d.get<int>());
  }
  return HilbertStructure(dims);
}

Cx parse_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(path + ": complex entries must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

CVec parse_vector(const json& j, int dim, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ParseError(path + ": vector of wrong length");
  CVec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = parse_complex(j[i], path);
  return v;
}

Mat parse_matrix(const json& j, int rows, int cols, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw ParseError(path + ": matrix of wrong shape");
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw ParseError(path + ": matrix of wrong shape");
    for (int c = 0; c < cols; ++c) m(r, c) = parse_complex(j[r][c], path);
  }
  return m;
}

json complex_json(const Cx& z) { return json::array({z.real(), z.imag()}); }

void warn(std::vector<std::string>* warnings, const std::string& message) {
  if (warnings) warnings->push_back(message);
}

// Symmetrize, clamp roundoff-negative eigenvalues, and rescale to unit
// trace; rejects anything outside the repair band.
Mat repair_density(const Mat& raw, const std::string& label,
                   const std::string& path,
                   std::vector<std::string>* warnings) {
  if ((raw - raw.adjoint()).cwiseAbs().maxCoeff() > kLoadTol)
    throw ParseError(path + ": " + label + " is not Hermitian");
  Mat sym = 0.5 * (raw + raw.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  Eigen::VectorXd vals = es.eigenvalues();
  if (vals(0) < -kLoadTol)
    throw ParseError(path + ": " + label + " is not positive semidefinite");
  double clamped = 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals(i) < 0.0) {
      clamped = std::max(clamped, -vals(i));
      vals(i) = 0.0;
    }
  double trace = vals.sum();
  if (std::abs(trace - 1.0) > kLoadTol)
    throw ParseError(path + ": " + label + " does not have unit trace");
  // Data already within machine precision passes through untouched so that
  // serialize, parse, serialize reproduces the file byte for byte.
  if (clamped <= 1e-12 && std::abs(trace - 1.0) <= 1e-12) return sym;
  warn(warnings, label + ": repaired within tolerance");
  vals /= trace;
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

nlohmann::json vector_json(const CVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

nlohmann::json matrix_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(complex_json(m(r, c)));
    out.push_back(row);
  }
  return out;
}

FileKind sniff_kind(const std::string& path) {
  json j = read_json(path);
  if (!j.is_object()) return FileKind::Unknown;
  if (j.contains("states")) return FileKind::States;
  if (j.contains("tree")) return FileKind::Protocol;
  if (j.contains("effects")) return FileKind::Povm;
  if (j.contains("factors")) return FileKind::ProductOp;
  if (j.contains("vectors")) return FileKind::Basis;
  return FileKind::Unknown;
}

WeightedStateFamily load_states(const std::string& path,
                                std::vector<std::string>* warnings) {
  json j = read_json(path);
  HilbertStructure h = parse_dims(j, path);
  if (!j.contains("states") || !j["states"].is_array() || j["states"].empty())
    throw ParseError(path + ": missing states");

  WeightedStateFamily family;
  family.structure = h;
  const int dim = h.total_dim();
  int with_prior = 0;
  for (std::size_t mu = 0; mu < j["states"].size(); ++mu) {
    const json& entry = j["states"][mu];
    const std::string label = "state " + std::to_string(mu);
    if (!entry.is_object())
      throw ParseError(path + ": " + label + " must be an object");
    if (entry.contains("prior")) {
      if (!entry["prior"].is_number() || entry["prior"].get<double>() <= 0.0)
        throw ParseError(path + ": " + label + " prior must be positive");
      family.priors.push_back(entry["prior"].get<double>());
      ++with_prior;
    } else {
      family.priors.push_back(0.0);  // fixed up below for the equal case
    }
    if (entry.contains("vector") == entry.contains("density"))
      throw ParseError(path + ": " + label +
                       " needs exactly one of vector or density");
    if (entry.contains("vector")) {
      CVec v = parse_vector(entry["vector"], dim, path);
      double norm = v.norm();
      if (std::abs(norm - 1.0) > kLoadTol)
        throw ParseError(path + ": " + label + " is not a unit vector");
      if (std::abs(norm - 1.0) > 1e-12) {
        warn(warnings, label + ": renormalized");
        v /= norm;
      }
      family.states.push_back(v * v.adjoint());
    } else {
      family.states.push_back(repair_density(
          parse_matrix(entry["density"], dim, dim, path), label, path,
          warnings));
    }
  }

  const int n = family.size();
  if (with_prior == 0) {
    for (double& p : family.priors) p = 1.0 / n;
  } else if (with_prior != n) {
    throw ParseError(path + ": priors must be given for all states or none");
  } else {
    double sum = 0.0;
    for (double p : family.priors) sum += p;
    if (std::abs(sum - 1.0) > kLoadTol)
      throw ParseError(path + ": priors do not sum to one");
    if (std::abs(sum - 1.0) > 1e-12)
      for (double& p : family.priors) p /= sum;
  }
  return family;
}

void save_states(const WeightedStateFamily& family, const std::string& path) {
  json j;
  j["dims"] = family.structure.party_dims();
  json states = json::array();
  for (int mu = 0; mu < family.size(); ++mu) {
    json entry;
    entry["prior"] = family.priors[mu];
    // Written data is exactly Hermitian so that reloading is a no-op and
    // serialize, parse, serialize reproduces the file byte for byte.
    Mat sym = 0.5 * (family.states[mu] + family.states[mu].adjoint());
    entry["density"] = matrix_json(sym);
    states.push_back(std::move(entry));
  }
  j["states"] = std::move(states);
  write_json(path, j);
}

namespace {

ProtocolNode parse_node(const json& j, const HilbertStructure& h, bool is_root,
                        const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": protocol node must be an object");
  ProtocolNode node;
  if (is_root) {
    node.op = identity(h.total_dim());
  } else {
    if (!j.contains("party") || !j["party"].is_number_integer())
      throw ParseError(path + ": node missing party");
    int party = j["party"].get<int>();
    if (party < 0 || party >= h.parties())
      throw ParseError(path + ": party out of range");
    if (!j.contains("op"))
      throw ParseError(path + ": node missing op");
    Mat local = parse_matrix(j["op"], h.dim(party), h.dim(party), path);
    node = local_node(h, party, local);
  }
  if (j.contains("children")) {
    if (!j["children"].is_array())
      throw ParseError(path + ": children must be an array");
    for (const json& c : j["children"])
      node.children.push_back(parse_node(c, h, false, path));
  }
  return node;
}

json node_json(const ProtocolNode& node, const HilbertStructure& h,
               bool is_root) {
  json j;
  if (!is_root) {
    Mat local = extract_local(h, node.party, node.op);
    if (op_norm(node.op - embed_local(h, node.party, local)) > 1e-8)
      throw std::invalid_argument("save_protocol: operator is not party-local");
    j["party"] = node.party;
    j["op"] = matrix_json(local);
  }
  json children = json::array();
  for (const ProtocolNode& c : node.children)
    children.push_back(node_json(c, h, false));
  j["children"] = std::move(children);
  return j;
}

}  // namespace

ProtocolTree load_protocol(const std::string& path) {
  json j = read_json(path);
  ProtocolTree tree;
  tree.structure = parse_dims(j, path);
  if (!j.contains("tree"))
    throw ParseError(path + ": missing tree");
  tree.root = parse_node(j["tree"], tree.structure, true, path);
  if (!validate(tree).ok(1e-8))
    throw ParseError(path + ": tree is not a valid protocol");
  return tree;
}

void save_protocol(const ProtocolTree& tree, const std::string& path) {
  json j;
  j["dims"] = tree.structure.party_dims();
  j["tree"] = node_json(tree.root, tree.structure, true);
  write_json(path, j);
}

Povm load_povm(const std::string& path) {
  json j = read_json(path);
  Povm povm;
  povm.structure = parse_dims(j, path);
  if (!j.contains("effects") || !j["effects"].is_array() || j["effects"].empty())
    throw ParseError(path + ": missing effects");
  const int dim = povm.structure.total_dim();
  for (const json& e : j["effects"]) {
    Mat m = parse_matrix(e, dim, dim, path);
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kLoadTol)
      throw ParseError(path + ": effect is not Hermitian");
    povm.effects.push_back(0.5 * (m + m.adjoint()));
  }
  PovmReport report = check_povm(povm);
  if (report.completeness_residual > kLoadTol ||
      report.min_effect_eigenvalue < -kLoadTol)
    throw ParseError(path + ": effects are not a POVM");
  return povm;
}

void save_povm(const Povm& povm, const std::string& path) {
  json j;
  j["dims"] = povm.structure.party_dims();
  json effects = json::array();
  for (const Mat& e : povm.effects) {
    Mat sym = 0.5 * (e + e.adjoint());
    effects.push_back(matrix_json(sym));
  }
  j["effects"] = std::move(effects);
  write_json(path, j);
}

ProductOperator load_product_operator(const std::string& path) {
  json j = read_json(path);
  ProductOperator op;
  op.structure = parse_dims(j, path);
  if (!j.contains("factors") || !j["factors"].is_array() ||
      static_cast<int>(j["factors"].size()) != op.structure.parties())
    throw ParseError(path + ": need one factor per party");
  for (int r = 0; r < op.structure.parties(); ++r) {
    Mat m = parse_matrix(j["factors"][r], op.structure.dim(r),
                         op.structure.dim(r), path);
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kLoadTol)
      throw ParseError(path + ": factor is not Hermitian");
    op.factors.push_back(0.5 * (m + m.adjoint()));
  }
  return op;
}

void save_product_operator(const ProductOperator& op, const std::string& path) {
  json j;
  j["dims"] = op.structure.party_dims();
  json factors = json::array();
  for (const Mat& f : op.factors) {
    Mat sym = 0.5 * (f + f.adjoint());
    factors.push_back(matrix_json(sym));
  }
  j["factors"] = std::move(factors);
  write_json(path, j);
}

ProductBasis load_basis(const std::string& path,
                        std::vector<std::string>* warnings) {
  json j = read_json(path);
  ProductBasis basis;
  basis.structure = parse_dims(j, path);
  if (!j.contains("vectors") || !j["vectors"].is_array() || j["vectors"].empty())
    throw ParseError(path + ": missing vectors");
  for (std::size_t mu = 0; mu < j["vectors"].size(); ++mu) {
    const json& row = j["vectors"][mu];
    if (!row.is_array() ||
        static_cast<int>(row.size()) != basis.structure.parties())
      throw ParseError(path + ": need one local vector per party");
    std::vector<CVec> factors;
    for (int r = 0; r < basis.structure.parties(); ++r) {
      CVec v = parse_vector(row[r], basis.structure.dim(r), path);
      double norm = v.norm();
      if (std::abs(norm - 1.0) > kLoadTol)
        throw ParseError(path + ": local vector is not unit length");
      if (std::abs(norm - 1.0) > 1e-12) {
        warn(warnings, "basis vector " + std::to_string(mu) + ": renormalized");
        v /= norm;
      }
      factors.push_back(std::move(v));
    }
    basis.vectors.push_back(std::move(factors));
  }
  return basis;
}

void save_basis(const ProductBasis& basis, const std::string& path) {
  json j;
  j["dims"] = basis.structure.party_dims();
  json vectors = json::array();
  for (const std::vector<CVec>& row : basis.vectors) {
    json factors = json::array();
    for (const CVec& v : row) factors.push_back(vector_json(v));
    vectors.push_back(std::move(factors));
  }
  j["vectors"] = std::move(vectors);
  write_json(path, j);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::uint64_t hash = 14695981039346656037ull;
  char byte;
  while (in.get(byte)) {
    hash ^= static_cast<unsigned char>(byte);
    hash *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

}  // namespace locc
