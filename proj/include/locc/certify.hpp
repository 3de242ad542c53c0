#pragma once

#include "locc/deviation.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace locc {

/// Product operator together with the recomputed condition residuals for a
/// target peak trace chi. The residual fields always hold freshly measured
/// quantities, never cached claims.
struct Certificate {
  ProductOperator E;
  double chi = 0.0;
  double normalization_residual = 0.0;  // |sum_mu tr(E rho_mu) - 1|
  double max_trace_residual = 0.0;      // |max_mu tr(E rho_mu) - chi|
  double orthogonality_residual = 0.0;  // max over mu != nu of |tr(E rho_mu E rho_nu)|
  double psd_margin = 0.0;
  bool pass = false;

  bool ok(double tol) const {
    return psd_margin >= -tol && normalization_residual <= tol &&
           max_trace_residual <= tol && orthogonality_residual <= tol;
  }
};

struct SearchConfig {
  int restarts = 64;
  std::uint64_t seed = 1;
  int max_iters = 500;
  double weight_normalization = 1.0;
  double weight_max_trace = 1.0;
  double weight_orthogonality = 1.0;
  double tol = 1e-12;  // stagnation threshold, relative to the objective
};

enum class ExtremumMode { Max, Min };

/// Extremal expectation over unit product vectors found by alternating
/// optimization. value is recomputed from argmax; eta repeats it under the
/// name used for lower bounds of the restricted spectrum.
struct ProductVectorReport {
  double max_overlap = 0.0;
  double eta = 0.0;
  std::vector<CVec> argmax;
  bool converged = true;
};

/// Seesaw over product vectors: each party in turn is set to the extremal
/// eigenvector of the partial contraction of m with the other factors.
/// Heuristic global search; max mode lower-bounds the true maximum, min
/// mode upper-bounds the true minimum.
ProductVectorReport product_vector_extremum(const Mat& m,
                                            const HilbertStructure& h,
                                            ExtremumMode mode,
                                            const SearchConfig& config);

struct PreconditionReport {
  bool pass = false;
  int kernel_dimension = 0;
  double max_product_overlap = 0.0;  // 0 when the kernel is trivial
  ProductVectorReport extremum;      // populated for a nontrivial kernel
};

/// A family qualifies when the common kernel of its states contains no
/// product vector: the maximal product overlap with the kernel projector
/// must stay below 1 - 1e-6.
PreconditionReport precondition_check(const WeightedStateFamily& family,
                                      const SearchConfig& config);

/// Recomputes positivity, sum of traces, peak trace, and pairwise
/// orthogonality of E against the bare states; priors are ignored.
Certificate verify_certificate(const ProductOperator& e,
                               const WeightedStateFamily& family, double chi,
                               double tol);

/// Penalty minimization over per-party factors L_r^dag L_r with restarts;
/// the best candidate is returned only if it verifies, otherwise nullopt.
/// Deterministic for fixed (seed, config); never claims nonexistence.
std::optional<Certificate> search_certificate(const WeightedStateFamily& family,
                                              double chi,
                                              const SearchConfig& config);

struct MdeltaReport {
  double psd_margin = 0.0;
  double normalization_residual = 0.0;  // weighted states enter here
  double achieved_deviation = 0.0;
  double deviation_residual = 0.0;
  bool pass = false;
};

/// Membership test for the delta boundary set: E >= 0, unit weighted trace
/// sum, and deviation exactly delta after the measurement outcome sqrt(E).
MdeltaReport mdelta_check(const ProductOperator& e,
                          const WeightedStateFamily& family, double delta,
                          DeviationKind kind, double tol);

/// Two-qubit certificate for the built-in three-state family, defined in
/// closed form for 1/3 <= chi <= 1 and normalized to unit trace sum.
ProductOperator closed_form_certificate(double chi);

/// The three orthonormal two-qubit vectors the closed form certifies.
std::vector<CVec> closed_form_state_vectors();

/// Equal-prior pure-state family over the vectors above.
WeightedStateFamily closed_form_family();

struct ScanEntry {
  double chi = 0.0;
  bool satisfied = false;  // false means inconclusive, never a refutation
  Certificate certificate;
};

struct ScanReport {
  std::vector<ScanEntry> entries;

  bool all_satisfied() const {
    for (const ScanEntry& e : entries)
      if (!e.satisfied) return false;
    return true;
  }
};

using CertificateBuilder = std::function<ProductOperator(double)>;

/// Checks certificate existence over a uniform chi grid on [1/N, 1],
/// through search_certificate or, when given, a closed-form builder.
ScanReport scan_chi(const WeightedStateFamily& family, int grid,
                    const SearchConfig& config,
                    const CertificateBuilder& closed_form = nullptr);

}  // namespace locc
