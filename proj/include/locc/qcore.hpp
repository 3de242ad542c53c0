#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace locc {

using Cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Absolute tolerance on Hermitian eigenvalues; negative eigenvalues in
// (-kPsdTol, 0) are treated as zero.
inline constexpr double kPsdTol = 1e-9;

/// Tensor-product layout of a multipartite Hilbert space. Party 0 owns the
/// most significant block of a flat index.
class HilbertStructure {
 public:
  HilbertStructure() = default;
  explicit HilbertStructure(std::vector<int> party_dims);

  int parties() const { return static_cast<int>(dims_.size()); }
  int dim(int party) const { return dims_.at(party); }
  const std::vector<int>& party_dims() const { return dims_; }
  int total_dim() const { return total_; }

  std::vector<int> unravel(int index) const;
  int ravel(const std::vector<int>& indices) const;

  bool operator==(const HilbertStructure& other) const {
    return dims_ == other.dims_;
  }

 private:
  std::vector<int> dims_;
  int total_ = 0;
};

Mat identity(int n);
Mat dagger(const Mat& m);

/// Largest singular value.
double op_norm(const Mat& m);

bool is_hermitian(const Mat& m, double tol = kPsdTol);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const Mat& m);

/// Kronecker product of the given square factors, in party order.
Mat tensor(const std::vector<Mat>& parts);

/// Kronecker product of per-party column vectors, in party order.
CVec tensor_vector(const std::vector<CVec>& parts);

/// Hermitian PSD square root via eigendecomposition. Eigenvalues in
/// (-tol, 0) are clamped to zero; anything below -tol throws.
Mat sqrt_psd(const Mat& m, double tol = kPsdTol);

/// Pseudo-inverse square root: eigenvalues above tol map to 1/sqrt,
/// the rest to zero.
Mat inv_sqrt_psd(const Mat& m, double tol = kPsdTol);

struct PolarDecomposition {
  Mat unitary;   // V, a full unitary
  Mat positive;  // P = sqrt(A^dag A)
};

/// A = V P with P Hermitian PSD. On rank-deficient inputs V is completed
/// from the singular bases (descending singular values), so the result is
/// deterministic.
PolarDecomposition polar(const Mat& a, double tol = kPsdTol);

/// Orthonormal basis of the eigenspace with eigenvalues <= tol of a
/// Hermitian PSD matrix.
std::vector<CVec> kernel_basis(const Mat& m, double tol = kPsdTol);

/// Lift a local operator on `party` to the full space, identity elsewhere.
Mat embed_local(const HilbertStructure& h, int party, const Mat& local);

/// Contract every party except `party` with the given product-vector
/// factors; the factor at `party` is ignored. The result L satisfies
/// <xi|M|xi> = v_party^dag L v_party for xi = tensor of the factors.
Mat partial_contraction(const HilbertStructure& h, const Mat& m, int party,
                        const std::vector<CVec>& factors);

/// Recover L from an operator of the form 1 x ... x L x ... x 1. The
/// caller must check the reconstruction if the form is not guaranteed.
Mat extract_local(const HilbertStructure& h, int party, const Mat& m);

/// Tensor product of per-party positive factors.
struct ProductOperator {
  HilbertStructure structure;
  std::vector<Mat> factors;  // one d_r x d_r factor per party

  Mat expand() const;
  /// Minimum eigenvalue over all factors and the expansion.
  double psd_margin() const;
};

}  // namespace locc
