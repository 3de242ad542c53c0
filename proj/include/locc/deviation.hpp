#pragma once

#include "locc/measure.hpp"

namespace locc {

/// States rho_mu with priors p_mu > 0; the weighted states are
/// gamma_mu = p_mu rho_mu.
struct WeightedStateFamily {
  HilbertStructure structure;
  std::vector<Mat> states;
  std::vector<double> priors;

  int size() const { return static_cast<int>(states.size()); }
  Mat weighted(int mu) const { return priors.at(mu) * states.at(mu); }

  static WeightedStateFamily equal_priors(const HilbertStructure& h,
                                          std::vector<Mat> states);
};

struct FamilyReport {
  double prior_sum_residual = 0.0;
  double worst_trace_residual = 0.0;
  double min_state_eigenvalue = 0.0;

  bool ok(double tol = 1e-9) const {
    return prior_sum_residual <= tol && worst_trace_residual <= tol &&
           min_state_eigenvalue >= -tol;
  }
};

FamilyReport check_family(const WeightedStateFamily& family);

/// Joint table p(mu, k) >= 0 over states (rows) and outcomes (columns),
/// summing to one. Tiny negative entries are clamped on construction.
class OutcomeDistribution {
 public:
  OutcomeDistribution() = default;
  explicit OutcomeDistribution(Eigen::MatrixXd table);

  int states() const { return static_cast<int>(table_.rows()); }
  int outcomes() const { return static_cast<int>(table_.cols()); }
  double operator()(int mu, int k) const { return table_(mu, k); }
  const Eigen::MatrixXd& table() const { return table_; }

 private:
  Eigen::MatrixXd table_;
};

enum class DeviationKind { MeanFailure, ConditionalEntropy, Finite };

OutcomeDistribution outcome_distribution(const Povm& povm,
                                         const WeightedStateFamily& family);

/// Minimal mean failure probability, 1 - sum_k max_mu p(mu,k).
double d_mf(const OutcomeDistribution& p);

/// Conditional entropy H(S|K) = H(S,K) - H(K) in nats.
double d_ce(const OutcomeDistribution& p);

/// 0 if every outcome column is supported on at most one state, else 1.
double d_finite(const OutcomeDistribution& p, double tol = 1e-9);

double deviation(DeviationKind kind, const OutcomeDistribution& p);

/// Deviation after a measurement result with Kraus operator A: evaluates
/// the chosen measure on the renormalized family (A gamma_mu A^dag / p_A),
/// or on the trivial measurement of the original family when p_A vanishes.
double conditional_deviation(DeviationKind kind, const Povm& povm,
                             const WeightedStateFamily& family, const Mat& a);

/// Classical post-processing p'(mu,l) = sum_k pi(l,k) p(mu,k); columns of
/// pi must be probability distributions over l.
OutcomeDistribution post_process(const OutcomeDistribution& p,
                                 const Eigen::MatrixXd& pi);

}  // namespace locc
