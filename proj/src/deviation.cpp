#include "locc/deviation.hpp"

#include <cmath>

namespace locc {

namespace {
constexpr double kClampTol = 1e-12;
constexpr double kBranchCutoff = 1e-14;  // p_A below this takes the else-branch
}  // namespace

WeightedStateFamily WeightedStateFamily::equal_priors(const HilbertStructure& h,
                                                      std::vector<Mat> states) {
  WeightedStateFamily family;
  family.structure = h;
  family.priors.assign(states.size(), 1.0 / static_cast<double>(states.size()));
  family.states = std::move(states);
  return family;
}

FamilyReport check_family(const WeightedStateFamily& family) {
  FamilyReport report;
  double prior_sum = 0.0;
  for (double p : family.priors) prior_sum += p;
  report.prior_sum_residual = std::abs(prior_sum - 1.0);
  for (const Mat& rho : family.states) {
    report.worst_trace_residual =
        std::max(report.worst_trace_residual, std::abs(rho.trace().real() - 1.0));
    report.min_state_eigenvalue =
        std::min(report.min_state_eigenvalue, min_eigenvalue(rho));
  }
  return report;
}

OutcomeDistribution::OutcomeDistribution(Eigen::MatrixXd table)
    : table_(std::move(table)) {
  if (table_.minCoeff() < -kClampTol)
    throw std::invalid_argument("OutcomeDistribution: negative entry");
  table_ = table_.cwiseMax(0.0);
}

OutcomeDistribution outcome_distribution(const Povm& povm,
                                         const WeightedStateFamily& family) {
  if (povm.structure.total_dim() != family.structure.total_dim())
    throw std::invalid_argument("outcome_distribution: dimension mismatch");
  Eigen::MatrixXd table(family.size(), povm.outcomes());
  for (int mu = 0; mu < family.size(); ++mu) {
    Mat gamma = family.weighted(mu);
    for (int k = 0; k < povm.outcomes(); ++k)
      table(mu, k) = (gamma * povm.effects[k]).trace().real();
  }
  return OutcomeDistribution(table);
}

double d_mf(const OutcomeDistribution& p) {
  double success = 0.0;
  for (int k = 0; k < p.outcomes(); ++k) {
    double best = 0.0;
    for (int mu = 0; mu < p.states(); ++mu) best = std::max(best, p(mu, k));
    success += best;
  }
  return 1.0 - success;
}

namespace {

double entropy_term(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

}  // namespace

double d_ce(const OutcomeDistribution& p) {
  double joint = 0.0;
  double marginal = 0.0;
  for (int k = 0; k < p.outcomes(); ++k) {
    double column = 0.0;
    for (int mu = 0; mu < p.states(); ++mu) {
      joint += entropy_term(p(mu, k));
      column += p(mu, k);
    }
    marginal += entropy_term(column);
  }
  return joint - marginal;
}

double d_finite(const OutcomeDistribution& p, double tol) {
  for (int k = 0; k < p.outcomes(); ++k) {
    int supported = 0;
    for (int mu = 0; mu < p.states(); ++mu)
      if (p(mu, k) > tol) ++supported;
    if (supported > 1) return 1.0;
  }
  return 0.0;
}

double deviation(DeviationKind kind, const OutcomeDistribution& p) {
  switch (kind) {
    case DeviationKind::MeanFailure: return d_mf(p);
    case DeviationKind::ConditionalEntropy: return d_ce(p);
    case DeviationKind::Finite: return d_finite(p);
  }
  throw std::logic_error("deviation: unknown kind");
}

double conditional_deviation(DeviationKind kind, const Povm& povm,
                             const WeightedStateFamily& family, const Mat& a) {
  if (a.rows() != a.cols() || a.rows() != family.structure.total_dim())
    throw std::invalid_argument("conditional_deviation: operator dimension mismatch");
  std::vector<Mat> conditioned;
  conditioned.reserve(family.size());
  double p_a = 0.0;
  for (int mu = 0; mu < family.size(); ++mu) {
    conditioned.push_back(a * family.weighted(mu) * a.adjoint());
    p_a += conditioned.back().trace().real();
  }
  if (p_a <= kBranchCutoff) {
    Povm trivial = trivial_povm(family.structure);
    return deviation(kind, outcome_distribution(trivial, family));
  }
  Eigen::MatrixXd table(family.size(), povm.outcomes());
  for (int mu = 0; mu < family.size(); ++mu)
    for (int k = 0; k < povm.outcomes(); ++k)
      table(mu, k) = (conditioned[mu] * povm.effects[k]).trace().real() / p_a;
  // Entries are traces of products of PSD operators; small negatives are
  // rounding noise amplified by 1/p_A.
  table = table.cwiseMax(0.0);
  return deviation(kind, OutcomeDistribution(table));
}

OutcomeDistribution post_process(const OutcomeDistribution& p,
                                 const Eigen::MatrixXd& pi) {
  if (pi.cols() != p.outcomes())
    throw std::invalid_argument("post_process: matrix shape mismatch");
  if (pi.minCoeff() < -kClampTol)
    throw std::invalid_argument("post_process: negative matrix entry");
  for (int k = 0; k < pi.cols(); ++k)
    if (std::abs(pi.col(k).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("post_process: columns must sum to one");
  return OutcomeDistribution(p.table() * pi.transpose());
}

}  // namespace locc
