#include "locc/qcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <functional>

namespace locc {

HilbertStructure::HilbertStructure(std::vector<int> party_dims)
    : dims_(std::move(party_dims)) {
  if (dims_.empty())
    throw std::invalid_argument("HilbertStructure: party_dims must be non-empty");
  total_ = 1;
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("HilbertStructure: dimensions must be >= 1");
    total_ *= d;
  }
}

std::vector<int> HilbertStructure::unravel(int index) const {
  std::vector<int> out(dims_.size());
  for (int r = parties() - 1; r >= 0; --r) {
    out[r] = index % dims_[r];
    index /= dims_[r];
  }
  return out;
}

int HilbertStructure::ravel(const std::vector<int>& indices) const {
  int flat = 0;
  for (int r = 0; r < parties(); ++r) flat = flat * dims_[r] + indices[r];
  return flat;
}

Mat identity(int n) { return Mat::Identity(n, n); }

Mat dagger(const Mat& m) { return m.adjoint(); }

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Mat tensor(const std::vector<Mat>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor: no factors");
  for (const Mat& p : parts)
    if (p.rows() != p.cols())
      throw std::invalid_argument("tensor: factors must be square");
  Mat acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const Mat& b = parts[i];
    Mat next(acc.rows() * b.rows(), acc.cols() * b.cols());
    for (Eigen::Index r = 0; r < acc.rows(); ++r)
      for (Eigen::Index c = 0; c < acc.cols(); ++c)
        next.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = acc(r, c) * b;
    acc = std::move(next);
  }
  return acc;
}

CVec tensor_vector(const std::vector<CVec>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor_vector: no factors");
  CVec acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const CVec& b = parts[i];
    CVec next(acc.size() * b.size());
    for (Eigen::Index r = 0; r < acc.size(); ++r)
      next.segment(r * b.size(), b.size()) = acc(r) * b;
    acc = std::move(next);
  }
  return acc;
}

namespace {

// Shared backend: f applied to the eigenvalues of a Hermitian matrix.
Mat hermitian_function(const Mat& m, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Eigen::VectorXd vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) vals(i) = f(vals(i));
  return es.eigenvectors() * vals.asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace

Mat sqrt_psd(const Mat& m, double tol) {
  if (!is_hermitian(m, 1e-8))
    throw std::invalid_argument("sqrt_psd: matrix is not Hermitian");
  double lo = min_eigenvalue(m);
  if (lo < -tol)
    throw std::invalid_argument("sqrt_psd: matrix has eigenvalue below -tol");
  return hermitian_function(m, [](double x) { return x > 0 ? std::sqrt(x) : 0.0; });
}

Mat inv_sqrt_psd(const Mat& m, double tol) {
  if (!is_hermitian(m, 1e-8))
    throw std::invalid_argument("inv_sqrt_psd: matrix is not Hermitian");
  return hermitian_function(
      m, [tol](double x) { return x > tol ? 1.0 / std::sqrt(x) : 0.0; });
}

PolarDecomposition polar(const Mat& a, double) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("polar: matrix must be square");
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat& u = svd.matrixU();
  const Mat& v = svd.matrixV();
  PolarDecomposition out;
  out.unitary = u * v.adjoint();
  out.positive = v * svd.singularValues().asDiagonal() * v.adjoint();
  return out;
}

std::vector<CVec> kernel_basis(const Mat& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  std::vector<CVec> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) <= tol) out.push_back(es.eigenvectors().col(i));
  return out;
}

Mat embed_local(const HilbertStructure& h, int party, const Mat& local) {
  if (party < 0 || party >= h.parties())
    throw std::invalid_argument("embed_local: party out of range");
  if (local.rows() != h.dim(party) || local.cols() != h.dim(party))
    throw std::invalid_argument("embed_local: local dimension mismatch");
  std::vector<Mat> parts;
  parts.reserve(h.parties());
  for (int r = 0; r < h.parties(); ++r)
    parts.push_back(r == party ? local : identity(h.dim(r)));
  return tensor(parts);
}

Mat partial_contraction(const HilbertStructure& h, const Mat& m, int party,
                        const std::vector<CVec>& factors) {
  const int d = h.dim(party);
  const int total = h.total_dim();
  Mat out = Mat::Zero(d, d);
  for (int row = 0; row < total; ++row) {
    std::vector<int> ri = h.unravel(row);
    Cx wr = 1.0;
    for (int s = 0; s < h.parties(); ++s)
      if (s != party) wr *= std::conj(factors[s](ri[s]));
    for (int col = 0; col < total; ++col) {
      std::vector<int> ci = h.unravel(col);
      Cx wc = 1.0;
      for (int s = 0; s < h.parties(); ++s)
        if (s != party) wc *= factors[s](ci[s]);
      out(ri[party], ci[party]) += wr * wc * m(row, col);
    }
  }
  return out;
}

Mat extract_local(const HilbertStructure& h, int party, const Mat& m) {
  // Reads the sub-block where every other party sits at index 0. For an
  // exactly embedded operator this reproduces the local block bit for bit,
  // which keeps serialization round-trips stable.
  const int d = h.dim(party);
  Mat out = Mat::Zero(d, d);
  std::vector<int> ri(h.parties(), 0), ci(h.parties(), 0);
  for (int a = 0; a < d; ++a) {
    ri[party] = a;
    for (int b = 0; b < d; ++b) {
      ci[party] = b;
      out(a, b) = m(h.ravel(ri), h.ravel(ci));
    }
  }
  return out;
}

Mat ProductOperator::expand() const { return tensor(factors); }

double ProductOperator::psd_margin() const {
  double margin = min_eigenvalue(expand());
  for (const Mat& f : factors) margin = std::min(margin, min_eigenvalue(f));
  return margin;
}

}  // namespace locc
