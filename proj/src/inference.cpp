#include "spechmm/inference.hpp"

#include <algorithm>
#include <cmath>

namespace spechmm::inference {

namespace {

constexpr double kUnderflow = 1e-300;

void merge_steps(std::vector<int>& into, const std::vector<int>& from) {
  into.insert(into.end(), from.begin(), from.end());
  std::sort(into.begin(), into.end());
  into.erase(std::unique(into.begin(), into.end()), into.end());
}

}  // namespace

EmissionEval true_emissions(const model::HmmSpec& hmm) {
  hmm.validate();
  EmissionEval emit;
  emit.provenance = EmissionEval::Provenance::kTrueDensity;
  emit.num_states = hmm.num_states;
  emit.eval = [hmm](double y) {
    Vec f(hmm.num_states);
    for (int x = 0; x < hmm.num_states; ++x) f(x) = model::eval_emission(hmm, x, y);
    return f;
  };
  return emit;
}

EmissionEval estimate_emissions(const spectral::SpectralEstimate& est) {
  EmissionEval emit;
  emit.provenance = EmissionEval::Provenance::kProjectionEstimate;
  emit.num_states = static_cast<int>(est.o_hat.cols());
  const auto coeffs = spectral::emission_estimates(est);
  emit.eval = [coeffs](double y) {
    Vec f(static_cast<int>(coeffs.size()));
    for (int x = 0; x < f.size(); ++x)
      f(x) = bases::reconstruct(coeffs[static_cast<std::size_t>(x)], y);
    return f;
  };
  return emit;
}

FilterResult forward_filter(const Mat& q, const ProbVec& pi, const EmissionEval& emit,
                            std::span<const double> obs) {
  const int k = pi.dim();
  if (q.rows() != k || q.cols() != k)
    throw DimensionError("forward_filter: transition matrix shape mismatch");
  if (emit.num_states != k) throw DimensionError("forward_filter: emission arity mismatch");
  if (obs.empty()) throw DimensionError("forward_filter: empty observation sequence");

  const std::int64_t n = static_cast<std::int64_t>(obs.size());
  FilterResult result;
  result.rows = Mat(n, k);

  Vec predictive = pi.vec();
  for (std::int64_t t = 0; t < n; ++t) {
    if (t > 0) predictive = q.transpose() * result.rows.row(t - 1).transpose();
    const Vec f = emit.eval(obs[static_cast<std::size_t>(t)]).cwiseMax(0.0);
    if (f.size() != k) throw DimensionError("forward_filter: emission arity mismatch");
    Vec row = predictive.cwiseProduct(f);
    double norm = row.sum();
    if (!(norm >= kUnderflow)) {
      result.degenerate_steps.push_back(static_cast<int>(t));
      row = predictive;
      norm = row.sum();
      if (!(norm >= kUnderflow)) {
        row = Vec::Constant(k, 1.0);
        norm = static_cast<double>(k);
      }
    }
    result.rows.row(t) = (row / norm).transpose();
  }
  return result;
}

SmoothResult backward_smooth(const Mat& q, const Mat& filter_rows) {
  const int k = static_cast<int>(q.rows());
  if (q.cols() != k) throw DimensionError("backward_smooth: transition matrix not square");
  if (filter_rows.cols() != k)
    throw DimensionError("backward_smooth: filter row width mismatch");
  const std::int64_t n = filter_rows.rows();
  if (n < 1) throw DimensionError("backward_smooth: empty filter");

  SmoothResult result;
  result.rows = Mat(n, k);
  result.rows.row(n - 1) = filter_rows.row(n - 1);

  for (std::int64_t t = n - 2; t >= 0; --t) {
    const Vec phi = filter_rows.row(t).transpose();
    const Vec denom = q.transpose() * phi;  // denom(u) = sum_z q(z, u) phi(z)
    bool degenerate = false;
    Mat b(k, k);  // b(u, v) = q(v, u) phi(v) / denom(u)
    for (int u = 0; u < k; ++u) {
      if (denom(u) < kUnderflow) {
        b.row(u).setConstant(1.0 / k);
        degenerate = true;
        continue;
      }
      for (int v = 0; v < k; ++v) b(u, v) = q(v, u) * phi(v) / denom(u);
    }
    if (degenerate) result.degenerate_steps.push_back(static_cast<int>(t));
    Vec row = b.transpose() * result.rows.row(t + 1).transpose();
    const double norm = row.sum();
    if (norm > 0.0) row /= norm;
    result.rows.row(t) = row.transpose();
  }
  std::sort(result.degenerate_steps.begin(), result.degenerate_steps.end());
  return result;
}

double tv_distance(const Vec& p, const Vec& r) {
  if (p.size() != r.size()) throw DimensionError("tv_distance: dimension mismatch");
  return (p - r).cwiseAbs().sum();
}

double tv_distance(const ProbVec& p, const ProbVec& r) { return tv_distance(p.vec(), r.vec()); }

double tv_distance_half(const Vec& p, const Vec& r) { return 0.5 * tv_distance(p, r); }

PosteriorTrack posterior_track(const Mat& q, const ProbVec& pi, const EmissionEval& emit,
                               std::span<const double> obs) {
  FilterResult filt = forward_filter(q, pi, emit, obs);
  SmoothResult smooth = backward_smooth(q, filt.rows);
  PosteriorTrack track;
  track.filter = std::move(filt.rows);
  track.smooth = std::move(smooth.rows);
  track.degenerate_steps = std::move(filt.degenerate_steps);
  merge_steps(track.degenerate_steps, smooth.degenerate_steps);
  return track;
}

PosteriorTrack plugin_posteriors(const spectral::SpectralEstimate& est,
                                 std::span<const double> obs) {
  return posterior_track(est.q_hat, est.pi_hat, estimate_emissions(est), obs);
}

PosteriorTrack oracle_posteriors(const model::HmmSpec& hmm, std::span<const double> obs) {
  return posterior_track(hmm.q, hmm.pi, true_emissions(hmm), obs);
}

}  // namespace spechmm::inference
