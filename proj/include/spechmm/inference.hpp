#ifndef SPECHMM_INFERENCE_HPP
#define SPECHMM_INFERENCE_HPP

#include "spechmm/model.hpp"
#include "spechmm/spectral.hpp"
#include "spechmm/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace spechmm::inference {

// Pointwise emission evaluator y -> (f_1(y), ..., f_K(y)). Projection
// estimates may be negative; the recursions clamp at 0 on use.
struct EmissionEval {
  enum class Provenance { kTrueDensity, kProjectionEstimate };

  std::function<Vec(double)> eval;
  Provenance provenance = Provenance::kTrueDensity;
  int num_states = 0;
};

EmissionEval true_emissions(const model::HmmSpec& hmm);
EmissionEval estimate_emissions(const spectral::SpectralEstimate& est);

// Per-step filtering and marginal smoothing distributions. Every row is a
// probability vector; time steps whose normalizer underflowed are listed in
// degenerate_steps (0-based, sorted).
struct PosteriorTrack {
  Mat filter;  // n x K
  Mat smooth;  // n x K
  std::vector<int> degenerate_steps;
};

struct FilterResult {
  Mat rows;  // n x K
  std::vector<int> degenerate_steps;
};

// Forward pass: row 1 = normalize(pi .* f(y_1)),
// row k = normalize((q^T row_{k-1}) .* f(y_k)). A vanished normalizer is
// replaced by the normalized predictive (uniform as last resort) and the
// step index recorded.
FilterResult forward_filter(const Mat& q, const ProbVec& pi, const EmissionEval& emit,
                            std::span<const double> obs);

struct SmoothResult {
  Mat rows;  // n x K
  std::vector<int> degenerate_steps;
};

// Backward pass over the filter rows:
//   smooth_n = filter_n
//   smooth_k(x) = sum_{x'} B(x', x) smooth_{k+1}(x'),
//   B(u, v) = q(v, u) filter_k(v) / sum_z q(z, u) filter_k(z).
// Vanished denominators fall back to a uniform column and flag the step.
SmoothResult backward_smooth(const Mat& q, const Mat& filter_rows);

// Total-mass total variation: sum_x |p(x) - r(x)|.
double tv_distance(const Vec& p, const Vec& r);
double tv_distance(const ProbVec& p, const ProbVec& r);
// Half-normalized variant in [0, 1] for reporting.
double tv_distance_half(const Vec& p, const Vec& r);

// Both passes with the given parameters.
PosteriorTrack posterior_track(const Mat& q, const ProbVec& pi, const EmissionEval& emit,
                               std::span<const double> obs);

// Both passes with plugged-in estimated parameters (reconstructed emission
// densities clamped at 0).
PosteriorTrack plugin_posteriors(const spectral::SpectralEstimate& est,
                                 std::span<const double> obs);

// Oracle posterior track under the true model.
PosteriorTrack oracle_posteriors(const model::HmmSpec& hmm, std::span<const double> obs);

}  // namespace spechmm::inference

#endif  // SPECHMM_INFERENCE_HPP
