#ifndef SPECHMM_EVAL_HPP
#define SPECHMM_EVAL_HPP

#include "spechmm/bases.hpp"
#include "spechmm/inference.hpp"
#include "spechmm/model.hpp"
#include "spechmm/spectral.hpp"
#include "spechmm/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace spechmm::eval {

// State relabeling resolving the label ambiguity of moment-based estimates:
// column perm[x] of the estimate matches column x of the truth.
struct Alignment {
  std::vector<int> perm;
  Vec column_errors;       // per-state L2 gap after alignment
  double total_cost = 0.0;
};

// Exhaustive minimization of summed column L2 distances over all K!
// permutations. Throws CapabilityError for K > 8.
Alignment align(const Mat& o_true, const Mat& o_hat);

// Estimate with states relabeled so its state x matches the truth's state x.
spectral::SpectralEstimate apply_alignment(const spectral::SpectralEstimate& est,
                                           const Alignment& alignment);

struct EmissionRisk {
  Vec coefficient_l2;  // per state: coefficient-space error (variance part)
  Vec total_l2;        // per state: quadrature-measured error including projection bias
};

EmissionRisk emission_l2_risk(const model::HmmSpec& hmm, const spectral::SpectralEstimate& est,
                              const Alignment& alignment, const bases::Quadrature& quad);

// Projection bias of the true emissions at the given basis size:
// per state, || f_x - f_{M,x} ||_2 under the quadrature.
Vec projection_bias(const model::HmmSpec& hmm, const bases::BasisSpec& spec,
                    const bases::Quadrature& quad);

// Precomputed ingredients of the error-propagation bounds for one audited
// observation record and one aligned estimate.
struct BoundInputs {
  double delta_star = 0.0;
  double rho_star = 0.0;
  double c_big_star = 0.0;
  double delta_hat = 0.0;
  double rho_hat = 0.0;
  double pi_error = 0.0;           // || pi - pi_hat ||_2 after alignment
  double q_error = 0.0;            // || Q - Q_hat ||_F after alignment
  Vec emission_gap;                // per step: max_x |f_x(y) - f_hat_x(y)| (clamped estimate)
  Vec c_star_values;               // per step: c_star(y)
  bool prop_constants_available = false;
  bool delta_hat_positive = false;
  std::vector<int> c_star_floor_steps;  // steps where c_star fell below the floor
};

// The estimate must already be aligned to the truth (apply_alignment).
BoundInputs bound_inputs(const model::HmmSpec& hmm, const spectral::SpectralEstimate& aligned_est,
                         std::span<const double> obs);

// Filtering-error bound at time k (1-based); +infinity when a floored c_star
// step participates.
double prop1_bound(const BoundInputs& inputs, int k);

// Smoothing-error bound at time k of a record of length n; +infinity when
// delta_hat = 0 or a floored c_star step participates.
double prop2_bound(const BoundInputs& inputs, int k, int n);

// Convenience forms computing alignment-adjusted inputs on the fly.
double prop1_bound(const model::HmmSpec& hmm, const spectral::SpectralEstimate& est,
                   const Alignment& alignment, std::span<const double> obs, int k);
double prop2_bound(const model::HmmSpec& hmm, const spectral::SpectralEstimate& est,
                   const Alignment& alignment, std::span<const double> obs, int k, int n);

// One audited record: measured total-variation errors of the plug-in
// recursions against the oracle ones, next to the bound values.
struct BoundReport {
  Vec lhs_filter;   // per step: sum_x |difference|
  Vec rhs_filter;   // per step: filtering bound
  Vec lhs_smooth;
  Vec rhs_smooth;   // per step: smoothing bound
  BoundInputs inputs;
  int filter_violations = 0;
  int smooth_violations = 0;
  bool flags_clean = false;  // no degeneracy, delta_hat > 0, no floored c_star
};

BoundReport audit_run(const model::HmmSpec& hmm, const spectral::SpectralEstimate& aligned_est,
                      std::span<const double> obs);

// Moment- and coefficient-error decay across sample sizes. p = -1 denotes the
// population row (errors evaluated on the exact moments themselves).
struct RateRow {
  std::int64_t p = 0;
  double median_p_err = 0.0, q25_p_err = 0.0, q75_p_err = 0.0;
  double median_m3_err = 0.0, q25_m3_err = 0.0, q75_m3_err = 0.0;
  double median_coeff_err = 0.0, q25_coeff_err = 0.0, q75_coeff_err = 0.0;
};

std::vector<RateRow> rate_study(const model::HmmSpec& hmm, const bases::BasisSpec& spec,
                                std::span<const std::int64_t> p_grid, int num_seeds,
                                std::uint64_t base_seed, bool include_population_row = false);

// Deterministic order statistics over a copied, sorted sample.
double quantile(std::vector<double> values, double t);

}  // namespace spechmm::eval

#endif  // SPECHMM_EVAL_HPP
