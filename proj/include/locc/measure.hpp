#pragma once

#include "locc/qcore.hpp"

namespace locc {

/// Finite measurement given by effects E_k >= 0 with sum_k E_k = 1.
struct Povm {
  HilbertStructure structure;
  std::vector<Mat> effects;

  int outcomes() const { return static_cast<int>(effects.size()); }
};

struct PovmReport {
  double min_effect_eigenvalue = 0.0;
  double completeness_residual = 0.0;

  bool ok(double tol = 1e-9) const {
    return min_effect_eigenvalue >= -tol && completeness_residual <= tol;
  }
};

PovmReport check_povm(const Povm& povm);

/// The one-outcome measurement X -> tr X.
Povm trivial_povm(const HilbertStructure& h);

/// Measurement with post-measurement states, Kraus operators A_k with
/// sum_k A_k^dag A_k = 1. `party` >= 0 marks a party-local instrument.
struct KrausInstrument {
  HilbertStructure structure;
  std::vector<Mat> kraus_ops;
  int party = -1;

  int outcomes() const { return static_cast<int>(kraus_ops.size()); }
  /// Effects A_k^dag A_k.
  Povm povm() const;
};

struct InstrumentReport {
  double completeness_residual = 0.0;
  double locality_residual = 0.0;  // 0 when not party-local

  bool ok(double tol = 1e-9) const {
    return completeness_residual <= tol && locality_residual <= tol;
  }
};

InstrumentReport check_instrument(const KrausInstrument& inst);

/// Interpolation weights b_k >= 0 of a pseudo-weak implementation;
/// beta = 1/(1 + sum_k b_k).
struct PseudoWeakParams {
  std::vector<double> b;

  double beta() const;
  static PseudoWeakParams zeros(int outcomes) {
    return {std::vector<double>(outcomes, 0.0)};
  }
};

/// Effects E_k^pw = beta (b_k 1 + E_k).
Povm pseudo_weak(const Povm& povm, const PseudoWeakParams& params);

/// Recovery measurement for pseudo-weak outcome k:
///   E^rc_{(k),l} = beta (b_k + delta_{kl}) (E_k^pw)^{-1/2} E_l (E_k^pw)^{-1/2},
/// or the deterministic POVM delta_{kl} 1 when b_k = 0.
Povm recovery_povm(const Povm& povm, const PseudoWeakParams& params, int k);

struct ResidualReport {
  bool ok = false;
  double max_residual = 0.0;
};

/// Verifies sqrt(E_k^pw) E^rc_{(k),l} sqrt(E_k^pw) = beta (b_k + delta_{kl}) E_l
/// for all k, l; returns the largest operator-norm residual.
ResidualReport recovery_identity_check(const Povm& povm,
                                       const PseudoWeakParams& params,
                                       double tol = 1e-9);

struct PseudoWeakInstrument {
  KrausInstrument pw;                    // Kraus ops sqrt(E_k^pw)
  std::vector<KrausInstrument> recovery; // recovery[k] follows pw outcome k
};

/// Pseudo-weak implementation of an instrument together with its recovery
/// steps. Composing recovery[k] after pw and forgetting k reproduces the
/// original channel.
PseudoWeakInstrument pseudo_weak_instrument(const KrausInstrument& inst,
                                            const PseudoWeakParams& params);

/// rho -> sum_k A_k rho A_k^dag.
Mat apply_channel(const std::vector<Mat>& kraus_ops, const Mat& rho);

}  // namespace locc
