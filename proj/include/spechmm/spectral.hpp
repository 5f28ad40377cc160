#ifndef SPECHMM_SPECTRAL_HPP
#define SPECHMM_SPECTRAL_HPP

#include "spechmm/bases.hpp"
#include "spechmm/moments.hpp"
#include "spechmm/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace spechmm::spectral {

// Empirical basis moments over the p = length - 2 overlapping triples of one
// observed chain. Throws InsufficientDataError below three observations and
// DomainError for observations outside [0, 1].
MomentSet empirical_moments(std::span<const double> obs, const bases::BasisSpec& spec);

struct Diagnostics {
  double sigma_k_p = 0.0;        // K-th singular value of the lag-2 moment matrix
  double min_eigen_gap = 0.0;    // smallest eigenvalue gap of the diagonalized operator
  double cond_u_p_u = 0.0;       // condition number of U^T P U
  double cond_u_o = 0.0;         // condition number of U^T O
  double offdiag_residual = 0.0; // max off-diagonal of R^{-1} C(x) R across x
  int theta_redraws = 0;
  bool stationary_fallback = false;  // boundary q_hat, least-squares stationary law
  std::uint64_t seed = 0;
};

// Output of the moment-based estimation: emission coefficients, the raw
// stationary surrogate, the projected transition matrix and its stationary
// law. pi_tilde carries no sign or simplex guarantee.
struct SpectralEstimate {
  bases::BasisSpec basis;
  Mat o_hat;       // M x K
  Vec pi_tilde;    // K, pre-projection surrogate
  Mat q_hat;       // K x K row-stochastic
  ProbVec pi_hat;  // stationary law of q_hat
  Diagnostics diagnostics;
};

// Moment-based parameter recovery:
//   U   = top-K right singular vectors of p
//   B(b) = (U^T p U)^{-1} U^T m3(., b, .) U
//   C(x) = sum_b (U Theta)(b, x) B(b)   with Theta Haar orthogonal
//   R    = unit-column diagonalizer of C(1)
//   Lambda(x, x') = (R^{-1} C(x) R)(x', x'),  o_hat = U Theta Lambda
//   pi_tilde = (U^T o_hat)^{-1} U^T l
//   q_hat = Pi_TM((U^T o_hat D_pi_tilde)^{-1} U^T n U (o_hat^T U)^{-1})
// On an eigenvalue-separation failure of C(1) the rotation is redrawn with a
// derived seed, up to `retries` times.
SpectralEstimate fit(const MomentSet& moments, const bases::BasisSpec& basis, int k,
                     std::uint64_t seed, int retries = 8);

// Column x of o_hat wrapped as a coefficient vector over the estimate basis.
std::vector<bases::CoeffVec> emission_estimates(const SpectralEstimate& est);

}  // namespace spechmm::spectral

#endif  // SPECHMM_SPECTRAL_HPP
