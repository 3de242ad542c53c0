#include "locc/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace locc {

namespace {

// Pass margin for the product-kernel precondition: the maximal product
// overlap with the kernel projector must stay below 1 minus this gap.
constexpr double kKernelOverlapGap = 1e-6;

// Tolerance at which search and scan accept a candidate certificate.
constexpr double kSearchVerifyTol = 1e-8;

CVec random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  CVec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Cx(gauss(rng), gauss(rng));
  v.normalize();
  return v;
}

double expectation(const Mat& m, const std::vector<CVec>& factors) {
  CVec xi = tensor_vector(factors);
  return (xi.adjoint() * m * xi)(0).real();
}

}  // namespace

ProductVectorReport product_vector_extremum(const Mat& m,
                                            const HilbertStructure& h,
                                            ExtremumMode mode,
                                            const SearchConfig& config) {
  if (m.rows() != h.total_dim() || m.cols() != h.total_dim())
    throw std::invalid_argument("product_vector_extremum: dimension mismatch");
  if (config.restarts < 1 || config.max_iters < 1)
    throw std::invalid_argument("product_vector_extremum: counts must be positive");

  const bool maximize = mode == ExtremumMode::Max;
  std::mt19937_64 rng(config.seed);
  ProductVectorReport best;
  bool have_best = false;

  for (int attempt = 0; attempt < config.restarts; ++attempt) {
    std::vector<CVec> factors;
    factors.reserve(h.parties());
    for (int p = 0; p < h.parties(); ++p)
      factors.push_back(random_unit(h.dim(p), rng));

    double value = expectation(m, factors);
    bool converged = false;
    for (int iter = 0; iter < config.max_iters && !converged; ++iter) {
      for (int p = 0; p < h.parties(); ++p) {
        Eigen::SelfAdjointEigenSolver<Mat> es(
            partial_contraction(h, m, p, factors));
        Eigen::Index pick = maximize ? es.eigenvalues().size() - 1 : 0;
        factors[p] = es.eigenvectors().col(pick);
      }
      double next = expectation(m, factors);
      converged = std::abs(next - value) < config.tol;
      value = next;
    }

    if (!have_best ||
        (maximize ? value > best.max_overlap : value < best.max_overlap)) {
      best.max_overlap = value;
      best.eta = value;
      best.argmax = std::move(factors);
      best.converged = converged;
      have_best = true;
    }
  }
  return best;
}

PreconditionReport precondition_check(const WeightedStateFamily& family,
                                      const SearchConfig& config) {
  if (!check_family(family).ok(1e-8))
    throw std::invalid_argument("precondition_check: invalid family");
  const int n = family.structure.total_dim();
  Mat r = Mat::Zero(n, n);
  for (int mu = 0; mu < family.size(); ++mu) r += family.weighted(mu);

  PreconditionReport report;
  std::vector<CVec> kernel = kernel_basis(r);
  report.kernel_dimension = static_cast<int>(kernel.size());
  if (kernel.empty()) {
    report.pass = true;
    return report;
  }
  Mat proj = Mat::Zero(n, n);
  for (const CVec& v : kernel) proj += v * v.adjoint();
  report.extremum =
      product_vector_extremum(proj, family.structure, ExtremumMode::Max, config);
  report.max_product_overlap = report.extremum.max_overlap;
  report.pass = report.max_product_overlap < 1.0 - kKernelOverlapGap;
  return report;
}

Certificate verify_certificate(const ProductOperator& e,
                               const WeightedStateFamily& family, double chi,
                               double tol) {
  if (!(e.structure == family.structure))
    throw std::invalid_argument("verify_certificate: structure mismatch");
  const int n = family.size();
  if (n < 2)
    throw std::invalid_argument("verify_certificate: need at least two states");
  if (chi < 1.0 / n - 1e-12 || chi > 1.0 + 1e-12)
    throw std::invalid_argument("verify_certificate: chi outside [1/N, 1]");

  Certificate cert;
  cert.E = e;
  cert.chi = chi;
  cert.psd_margin = e.psd_margin();

  const Mat big = e.expand();
  std::vector<Mat> erho;
  erho.reserve(n);
  double sum = 0.0;
  double peak = std::numeric_limits<double>::lowest();
  for (int mu = 0; mu < n; ++mu) {
    erho.push_back(big * family.states[mu]);
    double t = erho.back().trace().real();
    sum += t;
    peak = std::max(peak, t);
  }
  cert.normalization_residual = std::abs(sum - 1.0);
  cert.max_trace_residual = std::abs(peak - chi);
  for (int mu = 0; mu < n; ++mu)
    for (int nu = mu + 1; nu < n; ++nu)
      cert.orthogonality_residual =
          std::max(cert.orthogonality_residual,
                   std::abs((erho[mu] * erho[nu]).trace()));
  cert.pass = cert.ok(tol);
  return cert;
}

MdeltaReport mdelta_check(const ProductOperator& e,
                          const WeightedStateFamily& family, double delta,
                          DeviationKind kind, double tol) {
  if (!(e.structure == family.structure))
    throw std::invalid_argument("mdelta_check: structure mismatch");
  const Povm trivial = trivial_povm(family.structure);
  double ceiling = deviation(kind, outcome_distribution(trivial, family));
  if (!(delta > 0.0) || !(delta < ceiling))
    throw std::invalid_argument(
        "mdelta_check: delta must lie strictly between 0 and the trivial deviation");

  MdeltaReport report;
  report.psd_margin = e.psd_margin();
  const Mat big = e.expand();
  double sum = 0.0;
  for (int mu = 0; mu < family.size(); ++mu)
    sum += (big * family.weighted(mu)).trace().real();
  report.normalization_residual = std::abs(sum - 1.0);
  report.achieved_deviation =
      conditional_deviation(kind, trivial, family, sqrt_psd(big, 1e-8));
  report.deviation_residual = std::abs(report.achieved_deviation - delta);
  report.pass = report.psd_margin >= -tol &&
                report.normalization_residual <= tol &&
                report.deviation_residual <= tol;
  return report;
}

namespace {

struct PenaltyContext {
  const WeightedStateFamily* family;
  const std::vector<Mat>* roots;  // sqrt(rho_mu), fixed per search
  double chi;
  double sw_norm;  // square roots of the penalty weights
  double sw_peak;
  double sw_orth;
};

Mat positive_product(const std::vector<Mat>& ls) {
  std::vector<Mat> pos;
  pos.reserve(ls.size());
  for (const Mat& l : ls) pos.push_back(l.adjoint() * l);
  return tensor(pos);
}

// Residual vector of the penalty problem. The pairwise orthogonality
// condition tr(E rho_mu E rho_nu) = 0 is the squared Frobenius norm of
// sqrt(rho_mu) E sqrt(rho_nu), so the entries of that matrix enter as the
// residuals: they are linear in E and keep a nonzero Jacobian all the way
// into the solution, where the squared form would flatten out.
Eigen::VectorXd penalty_residuals(const Mat& big, const PenaltyContext& ctx) {
  const WeightedStateFamily& family = *ctx.family;
  const std::vector<Mat>& roots = *ctx.roots;
  const int n = family.size();
  const int dim = family.structure.total_dim();
  double sum = 0.0;
  double peak = std::numeric_limits<double>::lowest();
  for (int mu = 0; mu < n; ++mu) {
    double t = (big * family.states[mu]).trace().real();
    sum += t;
    peak = std::max(peak, t);
  }
  Eigen::VectorXd r(2 + n * (n - 1) * dim * dim);
  r(0) = ctx.sw_norm * (sum - 1.0);
  r(1) = ctx.sw_peak * (peak - ctx.chi);
  int at = 2;
  for (int mu = 0; mu < n; ++mu)
    for (int nu = mu + 1; nu < n; ++nu) {
      Mat cross = roots[mu] * big * roots[nu];
      for (int c = 0; c < dim; ++c)
        for (int row = 0; row < dim; ++row) {
          r(at++) = ctx.sw_orth * cross(row, c).real();
          r(at++) = ctx.sw_orth * cross(row, c).imag();
        }
    }
  return r;
}

void pack(const std::vector<Mat>& ls, Eigen::VectorXd& x) {
  int at = 0;
  for (const Mat& l : ls)
    for (Eigen::Index c = 0; c < l.cols(); ++c)
      for (Eigen::Index r = 0; r < l.rows(); ++r) {
        x(at++) = l(r, c).real();
        x(at++) = l(r, c).imag();
      }
}

void unpack(const Eigen::VectorXd& x, std::vector<Mat>& ls) {
  int at = 0;
  for (Mat& l : ls)
    for (Eigen::Index c = 0; c < l.cols(); ++c)
      for (Eigen::Index r = 0; r < l.rows(); ++r) {
        l(r, c) = Cx(x(at), x(at + 1));
        at += 2;
      }
}

// Exact Jacobian of the residual vector with respect to one party's factor,
// column order matching pack. The residuals are linear in the product
// operator and the operator is quadratic in the factor, so each column is a
// residual evaluation of the slot derivative delta^dag L + L^dag delta.
// A differenced Jacobian would cap the attainable residual near the square
// of its step size, which the flat directions of the penalty problem reach.
Eigen::MatrixXd penalty_jacobian(const std::vector<Mat>& ls, int party,
                                 const PenaltyContext& ctx, int peak_mu) {
  const WeightedStateFamily& family = *ctx.family;
  const std::vector<Mat>& roots = *ctx.roots;
  const int n = family.size();
  const int dim = family.structure.total_dim();
  const int d = static_cast<int>(ls[party].rows());
  std::vector<Mat> slots;
  slots.reserve(ls.size());
  for (const Mat& l : ls) slots.push_back(l.adjoint() * l);

  Eigen::MatrixXd jac(2 + n * (n - 1) * dim * dim, 2 * d * d);
  int j = 0;
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r)
      for (int part = 0; part < 2; ++part) {
        Mat delta = Mat::Zero(d, d);
        delta(r, c) = part == 0 ? Cx(1.0, 0.0) : Cx(0.0, 1.0);
        std::vector<Mat> probe = slots;
        probe[party] = delta.adjoint() * ls[party] + ls[party].adjoint() * delta;
        const Mat de = tensor(probe);

        double dsum = 0.0;
        for (int mu = 0; mu < n; ++mu)
          dsum += (de * family.states[mu]).trace().real();
        jac(0, j) = ctx.sw_norm * dsum;
        jac(1, j) = ctx.sw_peak * (de * family.states[peak_mu]).trace().real();
        int at = 2;
        for (int mu = 0; mu < n; ++mu)
          for (int nu = mu + 1; nu < n; ++nu) {
            Mat cross = roots[mu] * de * roots[nu];
            for (int cc = 0; cc < dim; ++cc)
              for (int row = 0; row < dim; ++row) {
                jac(at++, j) = ctx.sw_orth * cross(row, cc).real();
                jac(at++, j) = ctx.sw_orth * cross(row, cc).imag();
              }
          }
        ++j;
      }
  return jac;
}

// One Levenberg-Marquardt step over the stacked coordinates of every
// party's factor at once. The joint step keeps the quadratic local rate on
// instances whose party blocks are strongly coupled, where alternating
// per-party updates stall. Only steps that lower the objective are kept.
bool lm_step(std::vector<Mat>& ls, const PenaltyContext& ctx, double& lambda,
             double& phi) {
  int np = 0;
  for (const Mat& l : ls) np += 2 * static_cast<int>(l.size());
  Eigen::VectorXd x(np);
  pack(ls, x);
  const Mat big0 = positive_product(ls);
  const Eigen::VectorXd r0 = penalty_residuals(big0, ctx);

  // The max-trace residual is differentiated at the current argmax state.
  int peak_mu = 0;
  double peak = std::numeric_limits<double>::lowest();
  for (int mu = 0; mu < ctx.family->size(); ++mu) {
    double t = (big0 * ctx.family->states[mu]).trace().real();
    if (t > peak) {
      peak = t;
      peak_mu = mu;
    }
  }
  Eigen::MatrixXd jac(r0.size(), np);
  int col = 0;
  for (int p = 0; p < static_cast<int>(ls.size()); ++p) {
    const Eigen::MatrixXd block = penalty_jacobian(ls, p, ctx, peak_mu);
    jac.middleCols(col, block.cols()) = block;
    col += static_cast<int>(block.cols());
  }

  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const Eigen::VectorXd jtr = jac.transpose() * r0;
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::MatrixXd damped = jtj;
    damped.diagonal().array() += lambda;
    Eigen::VectorXd step = damped.ldlt().solve(-jtr);
    unpack(x + step, ls);
    double phi_new = penalty_residuals(positive_product(ls), ctx).squaredNorm();
    if (phi_new < phi) {
      lambda = std::max(lambda / 3.0, 1e-12);
      phi = phi_new;
      return true;
    }
    lambda = std::min(lambda * 4.0, 1e12);
  }
  unpack(x, ls);
  return false;
}

std::vector<Mat> initial_factors(int attempt, const HilbertStructure& h,
                                 std::mt19937_64& rng) {
  std::vector<Mat> ls;
  ls.reserve(h.parties());
  std::normal_distribution<double> gauss;
  for (int p = 0; p < h.parties(); ++p) {
    const int d = h.dim(p);
    if (attempt == 0) {
      ls.push_back(Mat::Identity(d, d));
      continue;
    }
    Mat l(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) l(r, c) = Cx(gauss(rng), gauss(rng));
    ls.push_back(std::move(l));
  }
  return ls;
}

// Rescale the first factor so the traces sum to one, when they do not
// vanish; a better-conditioned start for the penalty descent.
void scale_to_unit_sum(std::vector<Mat>& ls, const WeightedStateFamily& family) {
  const Mat big = positive_product(ls);
  double sum = 0.0;
  for (int mu = 0; mu < family.size(); ++mu)
    sum += (big * family.states[mu]).trace().real();
  if (sum > 1e-12) ls.front() /= std::sqrt(sum);
}

}  // namespace

std::optional<Certificate> search_certificate(const WeightedStateFamily& family,
                                              double chi,
                                              const SearchConfig& config) {
  if (config.restarts < 1 || config.max_iters < 1 ||
      config.weight_normalization <= 0.0 || config.weight_max_trace <= 0.0 ||
      config.weight_orthogonality <= 0.0 || config.tol <= 0.0)
    throw std::invalid_argument("search_certificate: config must be positive");
  const int n = family.size();
  if (chi < 1.0 / n - 1e-12 || chi > 1.0 + 1e-12)
    throw std::invalid_argument("search_certificate: chi outside [1/N, 1]");
  if (!precondition_check(family, config).pass)
    throw std::invalid_argument(
        "search_certificate: family fails the product-kernel precondition");

  std::vector<Mat> roots;
  roots.reserve(n);
  for (const Mat& rho : family.states) roots.push_back(sqrt_psd(rho, 1e-8));
  const PenaltyContext ctx{&family, &roots, chi,
                           std::sqrt(config.weight_normalization),
                           std::sqrt(config.weight_max_trace),
                           std::sqrt(config.weight_orthogonality)};
  std::mt19937_64 rng(config.seed);

  for (int attempt = 0; attempt < config.restarts; ++attempt) {
    std::vector<Mat> ls = initial_factors(attempt, family.structure, rng);
    scale_to_unit_sum(ls, family);
    double phi = penalty_residuals(positive_product(ls), ctx).squaredNorm();
    double lambda = 1e-3;
    // Stagnation is judged relative to the current objective: near factors
    // of deficient rank the objective decays by a bounded factor per round,
    // so an absolute threshold would abort descents that still converge.
    for (int round = 0; round < config.max_iters; ++round) {
      double before = phi;
      lm_step(ls, ctx, lambda, phi);
      if (phi < 1e-20 || before - phi < config.tol * std::max(phi, 1e-30))
        break;
    }

    ProductOperator candidate{family.structure, {}};
    for (const Mat& l : ls) candidate.factors.push_back(l.adjoint() * l);
    Certificate cert =
        verify_certificate(candidate, family, chi, kSearchVerifyTol);
    if (cert.pass) return cert;
  }
  return std::nullopt;
}

std::vector<CVec> closed_form_state_vectors() {
  const double s3 = std::sqrt(3.0);
  const double q3 = std::sqrt(s3);
  CVec psi1(4), psi2(4), psi3(4);
  psi1 << 1.0, 0.0, 0.0, 0.0;
  psi2 << 0.0, 2.0, -(s3 + 1.0), -std::sqrt(6.0) * q3;
  psi2 /= std::sqrt(8.0 + 8.0 * s3);
  psi3 << 0.0, 2.0, -(s3 - 1.0), std::sqrt(2.0) * q3;
  psi3 /= std::sqrt(8.0);
  return {psi1, psi2, psi3};
}

WeightedStateFamily closed_form_family() {
  HilbertStructure h({2, 2});
  std::vector<Mat> states;
  for (const CVec& v : closed_form_state_vectors())
    states.push_back(v * v.adjoint());
  return WeightedStateFamily::equal_priors(h, std::move(states));
}

ProductOperator closed_form_certificate(double chi) {
  if (chi < 1.0 / 3.0 - 1e-12 || chi > 1.0 + 1e-12)
    throw std::invalid_argument("closed_form_certificate: chi outside [1/3, 1]");
  const double s3 = std::sqrt(3.0);

  Mat left = Mat::Zero(2, 2);
  Mat right = Mat::Zero(2, 2);
  if (chi < 0.5) {
    double disc = (115.0 - 8.0 * s3) * chi * chi - (46.0 - 10.0 * s3) * chi -
                  2.0 * s3 + 4.0;
    if (disc < 0.0)
      throw std::logic_error("closed_form_certificate: negative discriminant");
    double root = std::sqrt(disc);
    left(0, 0) = 20.0 * chi + 2.0 * root - 4.0;
    left(1, 1) = (12.0 - s3) * chi + root + s3 - 1.0;
    right(0, 0) = -(4.0 + 3.0 * s3) * chi - root + 3.0 * s3 + 5.0;
    right(1, 1) = left(1, 1);
  } else {
    left(0, 0) = -(12.0 * s3 - 21.0) * chi + 3.0 * s3 - 3.0;
    left(1, 1) = (6.0 * s3 - 12.0) * chi - 2.0 * s3 + 6.0;
    left(0, 1) = left(1, 0) =
        std::sqrt(2.0 * s3 - 3.0) * ((5.0 * s3 - 3.0) * chi - 2.0 * s3);
    right(1, 1) = 1.0;
  }

  ProductOperator out{HilbertStructure({2, 2}), {left, right}};
  const Mat big = out.expand();
  double sum = 0.0;
  for (const CVec& v : closed_form_state_vectors())
    sum += (v.adjoint() * big * v)(0).real();
  if (sum <= 0.0)
    throw std::logic_error("closed_form_certificate: vanishing normalization");
  out.factors.front() /= sum;
  return out;
}

ScanReport scan_chi(const WeightedStateFamily& family, int grid,
                    const SearchConfig& config,
                    const CertificateBuilder& closed_form) {
  if (grid < 1)
    throw std::invalid_argument("scan_chi: grid must have at least one point");
  if (!precondition_check(family, config).pass)
    throw std::invalid_argument(
        "scan_chi: family fails the product-kernel precondition");

  const double lo = 1.0 / family.size();
  ScanReport report;
  report.entries.reserve(grid);
  for (int i = 0; i < grid; ++i) {
    double chi = grid == 1 ? lo : lo + (1.0 - lo) * i / (grid - 1);
    ScanEntry entry;
    entry.chi = chi;
    if (closed_form) {
      entry.certificate =
          verify_certificate(closed_form(chi), family, chi, kSearchVerifyTol);
      entry.satisfied = entry.certificate.pass;
    } else if (auto found = search_certificate(family, chi, config)) {
      entry.certificate = std::move(*found);
      entry.satisfied = true;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace locc
