#include "spechmm/eval.hpp"

#include "spechmm/numerics.hpp"
#include "spechmm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spechmm::eval {

namespace {

constexpr double kCStarFloor = 1e-12;

}  // namespace

Alignment align(const Mat& o_true, const Mat& o_hat) {
  if (o_true.rows() != o_hat.rows() || o_true.cols() != o_hat.cols())
    throw DimensionError("align: shape mismatch");
  const int k = static_cast<int>(o_true.cols());
  if (k > 8) throw CapabilityError("align: exhaustive search supports K <= 8");

  Mat cost(k, k);
  for (int x = 0; x < k; ++x)
    for (int j = 0; j < k; ++j) cost(x, j) = (o_true.col(x) - o_hat.col(j)).norm();

  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int x = 0; x < k; ++x) c += cost(x, perm[static_cast<std::size_t>(x)]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Alignment out;
  out.perm = best;
  out.total_cost = best_cost;
  out.column_errors = Vec(k);
  for (int x = 0; x < k; ++x) out.column_errors(x) = cost(x, best[static_cast<std::size_t>(x)]);
  return out;
}

spectral::SpectralEstimate apply_alignment(const spectral::SpectralEstimate& est,
                                           const Alignment& alignment) {
  const int k = static_cast<int>(est.o_hat.cols());
  if (static_cast<int>(alignment.perm.size()) != k)
    throw DimensionError("apply_alignment: permutation size mismatch");

  spectral::SpectralEstimate out = est;
  for (int x = 0; x < k; ++x) {
    const int j = alignment.perm[static_cast<std::size_t>(x)];
    out.o_hat.col(x) = est.o_hat.col(j);
    out.pi_tilde(x) = est.pi_tilde(j);
  }
  Vec pi_hat(k);
  for (int x = 0; x < k; ++x) {
    const int jx = alignment.perm[static_cast<std::size_t>(x)];
    pi_hat(x) = est.pi_hat[jx];
    for (int y = 0; y < k; ++y)
      out.q_hat(x, y) = est.q_hat(jx, alignment.perm[static_cast<std::size_t>(y)]);
  }
  out.pi_hat = ProbVec::normalized(pi_hat);
  return out;
}

EmissionRisk emission_l2_risk(const model::HmmSpec& hmm, const spectral::SpectralEstimate& est,
                              const Alignment& alignment, const bases::Quadrature& quad) {
  const int k = hmm.num_states;
  const Mat o_true = model::emission_coefficients(hmm, est.basis, quad);

  EmissionRisk risk;
  risk.coefficient_l2 = Vec(k);
  risk.total_l2 = Vec(k);
  for (int x = 0; x < k; ++x) {
    const int j = alignment.perm[static_cast<std::size_t>(x)];
    risk.coefficient_l2(x) = (o_true.col(x) - est.o_hat.col(j)).norm();
    const bases::CoeffVec estimate{est.basis, est.o_hat.col(j)};
    const double sq = quad.integrate([&](double y) {
      const double diff = model::eval_emission(hmm, x, y) - bases::reconstruct(estimate, y);
      return diff * diff;
    });
    risk.total_l2(x) = std::sqrt(std::max(0.0, sq));
  }
  return risk;
}

Vec projection_bias(const model::HmmSpec& hmm, const bases::BasisSpec& spec,
                    const bases::Quadrature& quad) {
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);
  Vec bias(hmm.num_states);
  for (int x = 0; x < hmm.num_states; ++x) {
    const bases::CoeffVec proj{spec, o_true.col(x)};
    const double sq = quad.integrate([&](double y) {
      const double diff = model::eval_emission(hmm, x, y) - bases::reconstruct(proj, y);
      return diff * diff;
    });
    bias(x) = std::sqrt(std::max(0.0, sq));
  }
  return bias;
}

BoundInputs bound_inputs(const model::HmmSpec& hmm, const spectral::SpectralEstimate& aligned_est,
                         std::span<const double> obs) {
  hmm.validate();
  const int k = hmm.num_states;
  if (static_cast<int>(aligned_est.o_hat.cols()) != k)
    throw DimensionError("bound_inputs: state count mismatch");

  const model::MarkovConstants constants = model::markov_constants(hmm);

  BoundInputs inputs;
  inputs.delta_star = constants.delta_star;
  inputs.prop_constants_available = constants.prop_constants_available;
  inputs.rho_star = constants.rho_star;
  inputs.c_big_star = constants.c_big_star;
  inputs.delta_hat = aligned_est.q_hat.minCoeff();
  inputs.delta_hat_positive = inputs.delta_hat > 0.0;
  inputs.rho_hat = inputs.delta_hat_positive && inputs.delta_hat < 1.0
                       ? 1.0 - inputs.delta_hat / (1.0 - inputs.delta_hat)
                       : 1.0;

  inputs.pi_error = (hmm.pi.vec() - aligned_est.pi_hat.vec()).norm();
  inputs.q_error = (hmm.q - aligned_est.q_hat).norm();

  const auto coeffs = spectral::emission_estimates(aligned_est);
  const std::int64_t n = static_cast<std::int64_t>(obs.size());
  inputs.emission_gap = Vec(n);
  inputs.c_star_values = Vec(n);
  for (std::int64_t t = 0; t < n; ++t) {
    const double y = obs[static_cast<std::size_t>(t)];
    double gap = 0.0;
    for (int x = 0; x < k; ++x) {
      const double f_hat =
          std::max(0.0, bases::reconstruct(coeffs[static_cast<std::size_t>(x)], y));
      gap = std::max(gap, std::abs(model::eval_emission(hmm, x, y) - f_hat));
    }
    inputs.emission_gap(t) = gap;
    const double cs = model::c_star(hmm, y);
    inputs.c_star_values(t) = cs;
    if (cs < kCStarFloor) inputs.c_star_floor_steps.push_back(static_cast<int>(t));
  }
  return inputs;
}

double prop1_bound(const BoundInputs& inputs, int k) {
  if (!inputs.prop_constants_available)
    throw DomainError("prop1_bound: forgetting constants unavailable (delta_star = 0)");
  if (k < 1 || k > inputs.emission_gap.size())
    throw DimensionError("prop1_bound: time index out of range");
  const double rho = inputs.rho_star;
  double emission_sum = 0.0;
  for (int l = 1; l <= k; ++l) {
    const double cs = inputs.c_star_values(l - 1);
    const double gap = inputs.emission_gap(l - 1);
    if (cs < kCStarFloor) {
      if (gap > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    emission_sum += std::pow(rho, k - l) * gap / cs;
  }
  const double head = std::pow(rho, k - 1) * inputs.pi_error / inputs.delta_star;
  const double q_term = inputs.q_error / (inputs.delta_star * (1.0 - rho));
  return inputs.c_big_star * (head + q_term + emission_sum);
}

double prop2_bound(const BoundInputs& inputs, int k, int n) {
  if (!inputs.prop_constants_available)
    throw DomainError("prop2_bound: forgetting constants unavailable (delta_star = 0)");
  if (n < 1 || n > inputs.emission_gap.size() || k < 1 || k > n)
    throw DimensionError("prop2_bound: time index out of range");
  if (!inputs.delta_hat_positive) return std::numeric_limits<double>::infinity();
  const double rho = inputs.rho_star;
  const double rho_mix = std::max(inputs.rho_hat, rho);
  double emission_sum = 0.0;
  for (int l = 1; l <= n; ++l) {
    const double cs = inputs.c_star_values(l - 1);
    const double gap = inputs.emission_gap(l - 1);
    if (cs < kCStarFloor) {
      if (gap > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    emission_sum += std::pow(rho_mix, std::abs(l - k)) * gap / cs;
  }
  const double head = std::pow(rho, k - 1) * inputs.pi_error / inputs.delta_star;
  const double q_term =
      (1.0 / (1.0 - rho) + 1.0 / (1.0 - inputs.rho_hat)) * inputs.q_error / inputs.delta_star;
  return inputs.c_big_star * (head + q_term + emission_sum);
}

double prop1_bound(const model::HmmSpec& hmm, const spectral::SpectralEstimate& est,
                   const Alignment& alignment, std::span<const double> obs, int k) {
  return prop1_bound(bound_inputs(hmm, apply_alignment(est, alignment), obs), k);
}

double prop2_bound(const model::HmmSpec& hmm, const spectral::SpectralEstimate& est,
                   const Alignment& alignment, std::span<const double> obs, int k, int n) {
  return prop2_bound(bound_inputs(hmm, apply_alignment(est, alignment), obs), k, n);
}

BoundReport audit_run(const model::HmmSpec& hmm, const spectral::SpectralEstimate& aligned_est,
                      std::span<const double> obs) {
  const std::int64_t n = static_cast<std::int64_t>(obs.size());
  BoundReport report;
  report.inputs = bound_inputs(hmm, aligned_est, obs);

  const inference::PosteriorTrack oracle = inference::oracle_posteriors(hmm, obs);
  const inference::PosteriorTrack plugin = inference::plugin_posteriors(aligned_est, obs);

  report.lhs_filter = Vec(n);
  report.rhs_filter = Vec(n);
  report.lhs_smooth = Vec(n);
  report.rhs_smooth = Vec(n);
  for (int t = 0; t < n; ++t) {
    report.lhs_filter(t) = inference::tv_distance(oracle.filter.row(t).transpose(),
                                                  plugin.filter.row(t).transpose());
    report.lhs_smooth(t) = inference::tv_distance(oracle.smooth.row(t).transpose(),
                                                  plugin.smooth.row(t).transpose());
    report.rhs_filter(t) = prop1_bound(report.inputs, t + 1);
    report.rhs_smooth(t) = prop2_bound(report.inputs, t + 1, static_cast<int>(n));
    if (report.lhs_filter(t) > report.rhs_filter(t)) ++report.filter_violations;
    if (report.lhs_smooth(t) > report.rhs_smooth(t)) ++report.smooth_violations;
  }

  report.flags_clean = oracle.degenerate_steps.empty() && plugin.degenerate_steps.empty() &&
                       report.inputs.delta_hat_positive &&
                       report.inputs.c_star_floor_steps.empty();
  return report;
}

double quantile(std::vector<double> values, double t) {
  if (values.empty()) throw DimensionError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = t * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::vector<RateRow> rate_study(const model::HmmSpec& hmm, const bases::BasisSpec& spec,
                                std::span<const std::int64_t> p_grid, int num_seeds,
                                std::uint64_t base_seed, bool include_population_row) {
  hmm.validate();
  spec.validate();
  if (num_seeds < 1) throw DomainError("rate_study: need at least one seed");
  for (std::size_t i = 1; i < p_grid.size(); ++i)
    if (p_grid[i] <= p_grid[i - 1]) throw DomainError("rate_study: p_grid must be increasing");

  const auto quad = bases::Quadrature::for_projection(spec);
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);
  const MomentSet population = model::population_moments(o_true, hmm.q, hmm.pi);

  auto coefficient_error = [&](const MomentSet& moments, std::uint64_t fit_seed) {
    try {
      const auto est = spectral::fit(moments, spec, hmm.num_states, fit_seed);
      const Alignment alignment = align(o_true, est.o_hat);
      double worst = 0.0;
      for (int x = 0; x < hmm.num_states; ++x) {
        const int j = alignment.perm[static_cast<std::size_t>(x)];
        worst = std::max(worst, (o_true.col(x) - est.o_hat.col(j)).norm());
      }
      return worst;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<RateRow> table;
  if (include_population_row) {
    RateRow row;
    row.p = -1;
    row.median_p_err = row.q25_p_err = row.q75_p_err = 0.0;
    row.median_m3_err = row.q25_m3_err = row.q75_m3_err = 0.0;
    const double err = coefficient_error(population, derive_seed(base_seed, 0xF17ull));
    row.median_coeff_err = row.q25_coeff_err = row.q75_coeff_err = err;
    table.push_back(row);
  }

  for (std::size_t gi = 0; gi < p_grid.size(); ++gi) {
    const std::int64_t p = p_grid[gi];
    if (p < 1) throw DomainError("rate_study: sample counts must be positive");
    std::vector<double> p_errs, m3_errs, coeff_errs;
    for (int s = 0; s < num_seeds; ++s) {
      const std::uint64_t seed = derive_seed(base_seed, (gi << 20) + static_cast<std::uint64_t>(s));
      const model::Trajectory traj = model::sample_trajectory(hmm, p + 2, seed);
      const MomentSet moments = spectral::empirical_moments(traj.obs, spec);
      p_errs.push_back((moments.p - population.p).norm());
      m3_errs.push_back(moments.m3.frobenius_distance(population.m3));
      coeff_errs.push_back(coefficient_error(moments, derive_seed(seed, 0xF17ull)));
    }
    RateRow row;
    row.p = p;
    row.median_p_err = quantile(p_errs, 0.5);
    row.q25_p_err = quantile(p_errs, 0.25);
    row.q75_p_err = quantile(p_errs, 0.75);
    row.median_m3_err = quantile(m3_errs, 0.5);
    row.q25_m3_err = quantile(m3_errs, 0.25);
    row.q75_m3_err = quantile(m3_errs, 0.75);
    row.median_coeff_err = quantile(coeff_errs, 0.5);
    row.q25_coeff_err = quantile(coeff_errs, 0.25);
    row.q75_coeff_err = quantile(coeff_errs, 0.75);
    table.push_back(row);
  }
  return table;
}

}  // namespace spechmm::eval
