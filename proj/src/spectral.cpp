#include "spechmm/spectral.hpp"

#include "spechmm/numerics.hpp"
#include "spechmm/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace spechmm::spectral {

namespace {

// Single-pass accumulation for bases whose evaluation is one indicator hit.
MomentSet histogram_moments(std::span<const double> obs, int m) {
  const std::int64_t p = static_cast<std::int64_t>(obs.size()) - 2;
  const double s = std::sqrt(static_cast<double>(m));
  const double s2 = s * s;
  const double s3 = s2 * s;

  MomentSet moments;
  moments.l = Vec::Zero(m);
  moments.n = Mat::Zero(m, m);
  moments.p = Mat::Zero(m, m);
  moments.m3 = Tensor3(m);

  int b0 = bases::histogram_bin(m, obs[0]);
  int b1 = bases::histogram_bin(m, obs[1]);
  for (std::int64_t t = 0; t < p; ++t) {
    const int b2 = bases::histogram_bin(m, obs[static_cast<std::size_t>(t + 2)]);
    moments.l(b0) += s;
    moments.n(b0, b1) += s2;
    moments.p(b0, b2) += s2;
    moments.m3(b0, b1, b2) += s3;
    b0 = b1;
    b1 = b2;
  }
  const double inv_p = 1.0 / static_cast<double>(p);
  moments.l *= inv_p;
  moments.n *= inv_p;
  moments.p *= inv_p;
  for (int b = 0; b < m; ++b) moments.m3.slice(b) *= inv_p;
  moments.sample_count = p;
  return moments;
}

}  // namespace

MomentSet empirical_moments(std::span<const double> obs, const bases::BasisSpec& spec) {
  spec.validate();
  if (obs.size() < 3)
    throw InsufficientDataError("empirical_moments: need at least 3 observations");
  for (double y : obs)
    if (!(y >= 0.0 && y <= 1.0))
      throw DomainError("empirical_moments: observation outside [0, 1]");

  if (spec.family == bases::Family::kHistogram) return histogram_moments(obs, spec.size);

  const int m = spec.size;
  const std::int64_t p = static_cast<std::int64_t>(obs.size()) - 2;

  MomentSet moments;
  moments.l = Vec::Zero(m);
  moments.n = Mat::Zero(m, m);
  moments.p = Mat::Zero(m, m);
  moments.m3 = Tensor3(m);

  Vec phi0 = bases::eval_basis(spec, obs[0]);
  Vec phi1 = bases::eval_basis(spec, obs[1]);
  Mat outer(m, m);
  for (std::int64_t t = 0; t < p; ++t) {
    Vec phi2 = bases::eval_basis(spec, obs[static_cast<std::size_t>(t + 2)]);
    moments.l += phi0;
    moments.n.noalias() += phi0 * phi1.transpose();
    outer.noalias() = phi0 * phi2.transpose();
    moments.p += outer;
    for (int b = 0; b < m; ++b) moments.m3.slice(b).noalias() += phi1(b) * outer;
    phi0.swap(phi1);
    phi1.swap(phi2);
  }
  const double inv_p = 1.0 / static_cast<double>(p);
  moments.l *= inv_p;
  moments.n *= inv_p;
  moments.p *= inv_p;
  for (int b = 0; b < m; ++b) moments.m3.slice(b) *= inv_p;
  moments.sample_count = p;
  return moments;
}

SpectralEstimate fit(const MomentSet& moments, const bases::BasisSpec& basis, int k,
                     std::uint64_t seed, int retries) {
  moments.validate();
  basis.validate();
  const int m = moments.dim();
  if (basis.size != m) throw DimensionError("fit: basis size does not match moments");
  if (k < 1) throw DimensionError("fit: state count must be positive");
  if (k > m) throw DimensionError("fit: state count exceeds moment dimension");
  if (retries < 0) throw DomainError("fit: retries must be nonnegative");

  Eigen::JacobiSVD<Mat> svd_p(moments.p, Eigen::ComputeThinV);
  const double sigma_k = svd_p.singularValues()(k - 1);
  if (sigma_k < numerics::kRankTol)
    throw EstimationError("fit: lag-2 moment matrix is rank deficient",
                          svd_p.singularValues()(0) / std::max(sigma_k, 1e-300));
  Mat u = svd_p.matrixV().leftCols(k);
  numerics::fix_column_signs(u);

  const Mat upu = u.transpose() * moments.p * u;  // K x K
  const double cond_upu = numerics::condition_number(upu);
  if (numerics::smallest_singular_value(upu) < numerics::kRankTol)
    throw EstimationError("fit: U^T P U not invertible", cond_upu);
  const Mat upu_inv = upu.inverse();

  std::vector<Mat> b_ops(static_cast<std::size_t>(m));
  for (int b = 0; b < m; ++b)
    b_ops[static_cast<std::size_t>(b)] = upu_inv * (u.transpose() * moments.m3.slice(b) * u);

  Diagnostics diag;
  diag.sigma_k_p = sigma_k;
  diag.cond_u_p_u = cond_upu;
  diag.seed = seed;

  for (int attempt = 0; attempt <= retries; ++attempt) {
    const Mat theta = numerics::haar_orthogonal(k, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    const Mat w = u * theta;  // M x K

    std::vector<Mat> c_ops(static_cast<std::size_t>(k), Mat::Zero(k, k));
    for (int x = 0; x < k; ++x)
      for (int b = 0; b < m; ++b) c_ops[static_cast<std::size_t>(x)] += w(b, x) * b_ops[static_cast<std::size_t>(b)];

    numerics::EigenPairs eig;
    try {
      eig = numerics::real_eig_distinct(c_ops[0]);
    } catch (const EigenSeparationError&) {
      ++diag.theta_redraws;
      continue;
    }

    diag.min_eigen_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j + 1 < k; ++j)
      diag.min_eigen_gap = std::min(diag.min_eigen_gap, eig.values(j) - eig.values(j + 1));
    if (k == 1) diag.min_eigen_gap = 0.0;

    const Mat r_inv = eig.vectors.inverse();
    Mat lambda(k, k);
    diag.offdiag_residual = 0.0;
    for (int x = 0; x < k; ++x) {
      const Mat d = r_inv * c_ops[static_cast<std::size_t>(x)] * eig.vectors;
      lambda.row(x) = d.diagonal().transpose();
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          if (i != j) diag.offdiag_residual = std::max(diag.offdiag_residual, std::abs(d(i, j)));
    }

    const Mat o_hat = w * lambda;  // M x K

    const Mat uto = u.transpose() * o_hat;
    diag.cond_u_o = numerics::condition_number(uto);
    if (numerics::smallest_singular_value(uto) < numerics::kRankTol)
      throw EstimationError("fit: U^T O_hat not invertible", diag.cond_u_o);
    const Vec pi_tilde = uto.inverse() * (u.transpose() * moments.l);

    for (int x = 0; x < k; ++x)
      if (std::abs(pi_tilde(x)) < 1e-10)
        throw EstimationError("fit: stationary surrogate entry below 1e-10 at state " +
                              std::to_string(x + 1));

    const Mat left = uto * pi_tilde.asDiagonal();
    const double cond_left = numerics::condition_number(left);
    if (numerics::smallest_singular_value(left) < numerics::kRankTol)
      throw EstimationError("fit: U^T O_hat D_pi not invertible", cond_left);
    const Mat q_raw =
        left.inverse() * (u.transpose() * moments.n * u) * (o_hat.transpose() * u).inverse();
    const Mat q_hat = numerics::project_row_stochastic(q_raw);

    ProbVec pi_hat;
    try {
      pi_hat = numerics::stationary_of(q_hat);
    } catch (const StructureError&) {
      // The simplex projection can return a boundary matrix (zero entries
      // making the chain reducible or periodic). A stationary law still
      // exists; solve the stacked fixed-point system directly.
      Mat a(k + 1, k);
      a.topRows(k) = Mat::Identity(k, k) - q_hat.transpose();
      a.bottomRows(1) = Mat::Ones(1, k);
      Vec rhs = Vec::Zero(k + 1);
      rhs(k) = 1.0;
      pi_hat = ProbVec::normalized(numerics::pinv_solve(a, rhs));
      diag.stationary_fallback = true;
    }
    const double fixed_point_residual =
        (q_hat.transpose() * pi_hat.vec() - pi_hat.vec()).norm();
    if (fixed_point_residual > 1e-8)
      throw EstimationError("fit: stationary law of the projected transition matrix "
                            "did not converge",
                            fixed_point_residual);

    SpectralEstimate est;
    est.basis = basis;
    est.o_hat = o_hat;
    est.pi_tilde = pi_tilde;
    est.q_hat = q_hat;
    est.pi_hat = pi_hat;
    est.diagnostics = diag;
    return est;
  }

  throw DiagonalizationError("fit: eigenvalue separation failed after " +
                             std::to_string(retries + 1) + " rotation draws");
}

std::vector<bases::CoeffVec> emission_estimates(const SpectralEstimate& est) {
  std::vector<bases::CoeffVec> out;
  out.reserve(static_cast<std::size_t>(est.o_hat.cols()));
  for (int x = 0; x < est.o_hat.cols(); ++x)
    out.push_back(bases::CoeffVec{est.basis, est.o_hat.col(x)});
  return out;
}

}  // namespace spechmm::spectral
