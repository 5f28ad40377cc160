#ifndef SPECHMM_NUMERICS_HPP
#define SPECHMM_NUMERICS_HPP

#include "spechmm/types.hpp"

#include <cstdint>

namespace spechmm::numerics {

// Singular values below this threshold signal an invalid estimate rather
// than a recoverable state.
inline constexpr double kRankTol = 1e-13;

// Minimal admissible gap between eigenvalues of a matrix we diagonalize.
inline constexpr double kEigSeparationTol = 1e-9;

// Deterministic sign convention: the largest-magnitude entry of each column
// is made positive. Ties resolve to the first such entry.
void fix_column_signs(Mat& a);

// Top-k orthonormal right singular vectors of a (M x k), deterministic via
// the sign convention above. Throws DimensionError when k exceeds the matrix
// dimensions and RankDeficiencyError when sigma_k falls below kRankTol.
Mat top_k_right_singular(const Mat& a, int k);

struct EigenPairs {
  Mat vectors;  // unit Euclidean norm columns
  Vec values;   // sorted descending
};

// Real eigendecomposition of a square matrix with real, pairwise separated
// eigenvalues. Throws EigenSeparationError on complex or nearly coincident
// spectra so callers can redraw their random rotation.
EigenPairs real_eig_distinct(const Mat& c, double separation_tol = kEigSeparationTol);

// Euclidean projection of v onto the probability simplex (sort-and-threshold).
Vec project_to_simplex(const Vec& v);

// Row-wise simplex projection: the Frobenius-nearest row-stochastic matrix.
Mat project_row_stochastic(const Mat& a);

// True when some power of the nonnegative matrix q is entrywise positive
// within K^2 steps (irreducible and aperiodic).
bool is_primitive(const Mat& q);

// Stationary distribution of a row-stochastic, irreducible and aperiodic q,
// obtained by least squares on the stacked system [I - q^T; 1^T] pi = e_{K+1}.
ProbVec stationary_of(const Mat& q);

// Haar-distributed real orthogonal k x k matrix, deterministic per seed
// (Gaussian matrix, QR factorization, R's diagonal signs corrected).
Mat haar_orthogonal(int k, std::uint64_t seed);

// Least-squares solve of a x = b; exact inverse path for square
// well-conditioned a. Throws RankDeficiencyError for singular square input.
Vec pinv_solve(const Mat& a, const Vec& b);

double smallest_singular_value(const Mat& a);
double condition_number(const Mat& a);

}  // namespace spechmm::numerics

#endif  // SPECHMM_NUMERICS_HPP
