#ifndef SPECHMM_MODEL_HPP
#define SPECHMM_MODEL_HPP

#include "spechmm/bases.hpp"
#include "spechmm/moments.hpp"
#include "spechmm/types.hpp"

#include <cstdint>
#include <vector>

namespace spechmm::model {

struct BetaComponent {
  double weight = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
};

using BetaMixture = std::vector<BetaComponent>;

double beta_mixture_density(const BetaMixture& mix, double y);

// Ground-truth hidden Markov model on [0, 1] with beta-mixture emissions.
struct HmmSpec {
  int num_states = 1;                 // K
  Mat q;                              // K x K row-stochastic
  ProbVec pi;                         // initial law
  std::vector<BetaMixture> emissions; // one mixture per state
  bool pi_is_stationary = true;

  void validate() const;
};

// The bundled two-state benchmark model: beta(2,5) and beta(4,3) emissions,
// q = [[0.4, 0.6], [0.8, 0.2]], stationary start (4/7, 3/7).
HmmSpec two_state_benchmark();

struct Trajectory {
  std::vector<int> hidden;   // states in [0, K)
  std::vector<double> obs;   // observations in [0, 1]
  std::uint64_t seed = 0;
};

// X_1 ~ pi, X_{j+1} ~ q(X_j, .), Y_j ~ emission(X_j); deterministic per seed.
Trajectory sample_trajectory(const HmmSpec& hmm, std::int64_t n, std::uint64_t seed);

// Beta-mixture density of state x at y (DomainError outside [0, 1]).
double eval_emission(const HmmSpec& hmm, int state, double y);

// Minimal one-step predictive density min_x sum_{x'} q(x, x') f_{x'}(y).
double c_star(const HmmSpec& hmm, double y);

// Forgetting and mixing constants of the hidden chain.
struct MarkovConstants {
  double delta_star = 0.0;   // min transition probability
  bool prop_constants_available = false;  // delta_star in (0, 1)
  double rho_star = 0.0;     // 1 - delta_star / (1 - delta_star)
  double c_big_star = 0.0;   // 4 (1 - delta_star) / delta_star
  double g_ps = 0.0;         // pseudo spectral gap
  double t_mix = 0.0;        // (1 + 3 log 2 - log pi_min) / g_ps
  int g_ps_argmax_k = 0;     // maximizer of G(.)/k
  int k_max = 0;             // search cap used for g_ps
};

MarkovConstants markov_constants(const HmmSpec& hmm, int k_max = 50);

// sqrt(2 / g_ps) + 2 sqrt(-2 t_mix log delta) for delta in (0, 1).
double c_star_constant(const HmmSpec& hmm, double delta);
double c_star_constant(const MarkovConstants& constants, double delta);

// Coefficient matrix of the emission densities in the basis: column x holds
// the projection coefficients of f_x (M x K).
Mat emission_coefficients(const HmmSpec& hmm, const bases::BasisSpec& spec,
                          const bases::Quadrature& quad);

// Population moments from the coefficient matrix o (M x K), the transition
// matrix and its stationary law:
//   l = o pi, n = o D_pi q o^T, p = o D_pi q^2 o^T,
//   m3(., b, .) = o D_pi q D_{o(b, .)} q o^T.
MomentSet population_moments(const Mat& o, const Mat& q, const ProbVec& pi);

}  // namespace spechmm::model

#endif  // SPECHMM_MODEL_HPP
