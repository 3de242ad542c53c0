#include "locc/measure.hpp"

#include <cmath>
#include <numeric>

namespace locc {

PovmReport check_povm(const Povm& povm) {
  PovmReport report;
  if (povm.effects.empty()) {
    report.completeness_residual = 1.0;
    return report;
  }
  const int n = povm.structure.total_dim();
  Mat sum = Mat::Zero(n, n);
  double min_eig = 0.0;
  for (const Mat& e : povm.effects) {
    min_eig = std::min(min_eig, min_eigenvalue(e));
    sum += e;
  }
  report.min_effect_eigenvalue = min_eig;
  report.completeness_residual = op_norm(sum - identity(n));
  return report;
}

Povm trivial_povm(const HilbertStructure& h) {
  return {h, {identity(h.total_dim())}};
}

Povm KrausInstrument::povm() const {
  Povm out{structure, {}};
  out.effects.reserve(kraus_ops.size());
  for (const Mat& a : kraus_ops) out.effects.push_back(a.adjoint() * a);
  return out;
}

InstrumentReport check_instrument(const KrausInstrument& inst) {
  InstrumentReport report;
  const int n = inst.structure.total_dim();
  Mat sum = Mat::Zero(n, n);
  for (const Mat& a : inst.kraus_ops) sum += a.adjoint() * a;
  report.completeness_residual = op_norm(sum - identity(n));
  if (inst.party >= 0) {
    for (const Mat& a : inst.kraus_ops) {
      Mat local = extract_local(inst.structure, inst.party, a);
      Mat rebuilt = embed_local(inst.structure, inst.party, local);
      report.locality_residual =
          std::max(report.locality_residual, op_norm(a - rebuilt));
    }
  }
  return report;
}

double PseudoWeakParams::beta() const {
  for (double bk : b)
    if (bk < 0.0) throw std::invalid_argument("PseudoWeakParams: b_k must be >= 0");
  double total = std::accumulate(b.begin(), b.end(), 0.0);
  return 1.0 / (1.0 + total);
}

Povm pseudo_weak(const Povm& povm, const PseudoWeakParams& params) {
  if (static_cast<int>(params.b.size()) != povm.outcomes())
    throw std::invalid_argument("pseudo_weak: parameter count must match outcomes");
  const double beta = params.beta();
  const Mat one = identity(povm.structure.total_dim());
  Povm out{povm.structure, {}};
  out.effects.reserve(povm.effects.size());
  for (int k = 0; k < povm.outcomes(); ++k)
    out.effects.push_back(beta * (params.b[k] * one + povm.effects[k]));
  return out;
}

Povm recovery_povm(const Povm& povm, const PseudoWeakParams& params, int k) {
  if (k < 0 || k >= povm.outcomes())
    throw std::invalid_argument("recovery_povm: outcome index out of range");
  const int n = povm.structure.total_dim();
  Povm out{povm.structure, {}};
  out.effects.reserve(povm.effects.size());
  if (params.b[k] == 0.0) {
    for (int l = 0; l < povm.outcomes(); ++l)
      out.effects.push_back(l == k ? identity(n) : Mat::Zero(n, n));
    return out;
  }
  const double beta = params.beta();
  const Mat pw_k = beta * (params.b[k] * identity(n) + povm.effects[k]);
  const Mat root = inv_sqrt_psd(pw_k);
  for (int l = 0; l < povm.outcomes(); ++l) {
    double weight = beta * (params.b[k] + (k == l ? 1.0 : 0.0));
    out.effects.push_back(weight * root * povm.effects[l] * root);
  }
  return out;
}

ResidualReport recovery_identity_check(const Povm& povm,
                                       const PseudoWeakParams& params,
                                       double tol) {
  const double beta = params.beta();
  const Povm pw = pseudo_weak(povm, params);
  ResidualReport report;
  for (int k = 0; k < povm.outcomes(); ++k) {
    const Mat pw_root = sqrt_psd(pw.effects[k]);
    const Povm rc = recovery_povm(povm, params, k);
    for (int l = 0; l < povm.outcomes(); ++l) {
      double weight = beta * (params.b[k] + (k == l ? 1.0 : 0.0));
      Mat residual = pw_root * rc.effects[l] * pw_root - weight * povm.effects[l];
      report.max_residual = std::max(report.max_residual, op_norm(residual));
    }
  }
  report.ok = report.max_residual <= tol;
  return report;
}

namespace {

// Unitary U with U T = S, valid whenever T^dag T = S^dag S; the polar
// unitary of S T^dag, completed deterministically off the support.
Mat aligning_unitary(const Mat& s, const Mat& t) {
  Mat overlap = s * t.adjoint();
  return polar(overlap).unitary;
}

}  // namespace

PseudoWeakInstrument pseudo_weak_instrument(const KrausInstrument& inst,
                                            const PseudoWeakParams& params) {
  InstrumentReport health = check_instrument(inst);
  if (!health.ok(1e-8))
    throw std::invalid_argument("pseudo_weak_instrument: invalid instrument");

  // For a party-local instrument, run the construction on the local factor
  // and lift. Working on full-space matrices would let the polar completion
  // of a singular factor leak outside the 1 x ... x L x ... x 1 form.
  if (inst.party >= 0 && inst.structure.parties() > 1) {
    const int party = inst.party;
    HilbertStructure local_space({inst.structure.dim(party)});
    KrausInstrument local{local_space, {}, -1};
    for (const Mat& a : inst.kraus_ops)
      local.kraus_ops.push_back(extract_local(inst.structure, party, a));
    PseudoWeakInstrument sub = pseudo_weak_instrument(local, params);

    auto lift = [&](const KrausInstrument& src) {
      KrausInstrument dst{inst.structure, {}, party};
      for (const Mat& a : src.kraus_ops)
        dst.kraus_ops.push_back(embed_local(inst.structure, party, a));
      return dst;
    };
    PseudoWeakInstrument out;
    out.pw = lift(sub.pw);
    for (const KrausInstrument& step : sub.recovery)
      out.recovery.push_back(lift(step));
    return out;
  }

  const double beta = params.beta();
  const Povm effects = inst.povm();
  const Povm pw_effects = pseudo_weak(effects, params);

  PseudoWeakInstrument out;
  out.pw = KrausInstrument{inst.structure, {}, inst.party};
  std::vector<Mat> isometries;  // V_l from A_l = V_l sqrt(E_l)
  std::vector<Mat> effect_roots;
  for (int l = 0; l < inst.outcomes(); ++l) {
    out.pw.kraus_ops.push_back(sqrt_psd(pw_effects.effects[l]));
    isometries.push_back(polar(inst.kraus_ops[l]).unitary);
    effect_roots.push_back(sqrt_psd(effects.effects[l]));
  }

  for (int k = 0; k < inst.outcomes(); ++k) {
    const Povm rc = recovery_povm(effects, params, k);
    KrausInstrument step{inst.structure, {}, inst.party};
    const Mat pw_root = out.pw.kraus_ops[k];
    for (int l = 0; l < inst.outcomes(); ++l) {
      const Mat rc_root = sqrt_psd(rc.effects[l]);
      double weight = beta * (params.b[k] + (k == l ? 1.0 : 0.0));
      Mat target = std::sqrt(weight) * effect_roots[l];
      Mat u = aligning_unitary(target, rc_root * pw_root);
      step.kraus_ops.push_back(isometries[l] * u * rc_root);
    }
    out.recovery.push_back(std::move(step));
  }
  return out;
}

Mat apply_channel(const std::vector<Mat>& kraus_ops, const Mat& rho) {
  if (kraus_ops.empty()) throw std::invalid_argument("apply_channel: no Kraus operators");
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (const Mat& a : kraus_ops) out += a * rho * a.adjoint();
  return out;
}

}  // namespace locc
