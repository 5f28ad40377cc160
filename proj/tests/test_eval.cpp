#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spechmm/eval.hpp"
#include "spechmm/model.hpp"
#include "spechmm/numerics.hpp"
#include "spechmm/rng.hpp"
#include "spechmm/spectral.hpp"

#include "support.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace spechmm;
using namespace spechmm::eval;

namespace {

spectral::SpectralEstimate population_estimate(const model::HmmSpec& hmm,
                                               const bases::BasisSpec& spec, std::uint64_t seed) {
  const auto quad = bases::Quadrature::for_projection(spec);
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);
  const auto moments = model::population_moments(o_true, hmm.q, hmm.pi);
  return spectral::fit(moments, spec, hmm.num_states, seed);
}

// Estimate whose entries equal the truth exactly (self-test path).
spectral::SpectralEstimate exact_estimate(const model::HmmSpec& hmm,
                                          const bases::BasisSpec& spec) {
  const auto quad = bases::Quadrature::for_projection(spec);
  spectral::SpectralEstimate est;
  est.basis = spec;
  est.o_hat = model::emission_coefficients(hmm, spec, quad);
  est.pi_tilde = hmm.pi.vec();
  est.q_hat = hmm.q;
  est.pi_hat = hmm.pi;
  return est;
}

}  // namespace

TEST_CASE("align: swapped and identical copies") {
  Rng rng(3);
  Mat o(6, 2);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) o(i, j) = rng.normal();
  Mat swapped(6, 2);
  swapped.col(0) = o.col(1);
  swapped.col(1) = o.col(0);

  const auto a = align(o, swapped);
  CHECK(a.perm == std::vector<int>{1, 0});
  CHECK(a.total_cost <= 1e-12);

  const auto b = align(o, o);
  CHECK(b.perm == std::vector<int>{0, 1});
  CHECK(b.total_cost <= 1e-12);
}

TEST_CASE("align: planted permutation under small noise") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2 + trial % 3;
    Mat o(8, k);
    for (;;) {
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < k; ++j) o(i, j) = rng.normal();
      double gamma = std::numeric_limits<double>::infinity();
      for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) gamma = std::min(gamma, (o.col(a) - o.col(b)).norm());
      if (gamma > 0.1) break;
    }
    std::vector<int> planted(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) planted[static_cast<std::size_t>(i)] = (i + 1) % k;
    Mat noisy(8, k);
    for (int x = 0; x < k; ++x) {
      noisy.col(planted[static_cast<std::size_t>(x)]) = o.col(x);
      for (int i = 0; i < 8; ++i) noisy(i, planted[static_cast<std::size_t>(x)]) += 1e-3 * rng.normal();
    }
    const auto a = align(o, noisy);
    CHECK(a.perm == planted);
  }
}

TEST_CASE("align: idempotent after relabeling and capability limit") {
  Mat o = Mat::Random(5, 3);
  const auto first = align(o, o);
  CHECK(first.total_cost <= 1e-12);
  Mat big = Mat::Random(4, 9);
  CHECK_THROWS_AS(align(big, big), CapabilityError);
}

TEST_CASE("emission_l2_risk: population oracle leaves only the projection bias") {
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(16);
  const auto quad = bases::Quadrature::for_projection(spec);
  const auto est = population_estimate(hmm, spec, 19);
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);
  const auto alignment = align(o_true, est.o_hat);
  const auto risk = emission_l2_risk(hmm, est, alignment, quad);
  const Vec bias = projection_bias(hmm, spec, quad);
  for (int x = 0; x < 2; ++x) {
    CHECK(risk.coefficient_l2(x) <= 1e-8);
    CHECK(risk.total_l2(x) == doctest::Approx(bias(x)).epsilon(1e-6));
  }
}

TEST_CASE("emission_l2_risk: large basis closes the bias") {
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(256);
  const auto quad = bases::Quadrature::for_projection(spec);
  const auto est = population_estimate(hmm, spec, 23);
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);
  const auto alignment = align(o_true, est.o_hat);
  const auto risk = emission_l2_risk(hmm, est, alignment, quad);
  for (int x = 0; x < 2; ++x) CHECK(risk.total_l2(x) < 0.02);
}

TEST_CASE("emission_l2_risk: exact self-test gives zero") {
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(32);
  const auto quad = bases::Quadrature::for_projection(spec);
  const auto est = exact_estimate(hmm, spec);
  Alignment id;
  id.perm = {0, 1};
  id.column_errors = Vec::Zero(2);
  const auto risk = emission_l2_risk(hmm, est, id, quad);
  const Vec bias = projection_bias(hmm, spec, quad);
  for (int x = 0; x < 2; ++x) {
    CHECK(risk.coefficient_l2(x) == 0.0);
    CHECK(risk.total_l2(x) == doctest::Approx(bias(x)).epsilon(1e-9));
  }
}

TEST_CASE("coefficient-space error equals quadrature error of the projected gap") {
  // Parseval on the shared basis: || O(:,x) - O_hat(:,x) ||_2 equals the
  // quadrature L2 norm of the reconstructed difference.
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(16);
  const auto quad = bases::Quadrature::for_projection(spec);
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);
  Rng rng(5);
  Mat o_hat = o_true;
  for (int i = 0; i < o_hat.rows(); ++i)
    for (int j = 0; j < o_hat.cols(); ++j) o_hat(i, j) += 0.1 * rng.normal();
  for (int x = 0; x < 2; ++x) {
    const bases::CoeffVec diff{spec, Vec(o_true.col(x) - o_hat.col(x))};
    const double quad_norm = std::sqrt(quad.integrate([&](double y) {
      const double v = bases::reconstruct(diff, y);
      return v * v;
    }));
    CHECK(std::abs(quad_norm - (o_true.col(x) - o_hat.col(x)).norm()) <= 1e-8);
  }
}

TEST_CASE("prop1_bound: vanishes for the exact estimate") {
  const auto hmm = model::two_state_benchmark();
  const auto est = exact_estimate(hmm, bases::histogram(64));
  // The projected emissions differ from the true ones, so use the true
  // densities directly by zeroing the emission gap via a perfect estimate:
  // feed the bound inputs with f_hat = f (exact_estimate reconstructs the
  // projection, so evaluate the bound on a grid where the gap is measured
  // against the projection itself).
  const auto traj = model::sample_trajectory(hmm, 50, 3);
  auto inputs = bound_inputs(hmm, est, traj.obs);
  // Overwrite the emission gaps with the exact-density gap (zero) to model
  // a perfect plug-in; pi and q gaps are already zero.
  inputs.emission_gap.setZero();
  CHECK(inputs.pi_error <= 1e-12);
  CHECK(inputs.q_error <= 1e-12);
  for (int k = 1; k <= 50; ++k) CHECK(prop1_bound(inputs, k) <= 1e-10);
  for (int k = 1; k <= 50; ++k) CHECK(prop2_bound(inputs, k, 50) <= 1e-10);
}

TEST_CASE("prop1_bound: transition-perturbation limit") {
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(64);
  auto est = exact_estimate(hmm, spec);
  const double eps = 0.01;
  est.q_hat(0, 0) += eps;
  est.q_hat(0, 1) -= eps;
  est.pi_hat = hmm.pi;  // keep pi exact

  const auto traj = model::sample_trajectory(hmm, 400, 7);
  auto inputs = bound_inputs(hmm, est, traj.obs);
  inputs.emission_gap.setZero();  // f exact
  const double dq = (hmm.q - est.q_hat).norm();
  // At large k the pi term dies and the bound tends to C (dq / (delta (1 - rho))).
  const double expected = 16.0 * dq / (0.2 * 0.25);
  CHECK(prop1_bound(inputs, 400) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("prop bounds: monotone in each error term") {
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(11);
  const auto est = population_estimate(hmm, spec, 3);
  const auto quad = bases::Quadrature::for_projection(spec);
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);
  const auto aligned = apply_alignment(est, align(o_true, est.o_hat));
  const auto traj = model::sample_trajectory(hmm, 60, 5);
  auto inputs = bound_inputs(hmm, aligned, traj.obs);
  inputs.pi_error = 0.01;
  inputs.q_error = 0.01;
  inputs.emission_gap.setConstant(0.05);

  auto bigger = inputs;
  bigger.pi_error *= 2.0;
  CHECK(prop1_bound(bigger, 30) > prop1_bound(inputs, 30));
  CHECK(prop2_bound(bigger, 30, 60) > prop2_bound(inputs, 30, 60));
  bigger = inputs;
  bigger.q_error *= 3.0;
  CHECK(prop1_bound(bigger, 30) > prop1_bound(inputs, 30));
  CHECK(prop2_bound(bigger, 30, 60) > prop2_bound(inputs, 30, 60));
  bigger = inputs;
  bigger.emission_gap *= 1.5;
  CHECK(prop1_bound(bigger, 30) > prop1_bound(inputs, 30));
  CHECK(prop2_bound(bigger, 30, 60) > prop2_bound(inputs, 30, 60));
}

TEST_CASE("prop2_bound: smoothing dominates filtering at k = n when rho_hat >= rho") {
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(11);
  const auto est = population_estimate(hmm, spec, 9);
  const auto quad = bases::Quadrature::for_projection(spec);
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);
  const auto aligned = apply_alignment(est, align(o_true, est.o_hat));
  const auto traj = model::sample_trajectory(hmm, 80, 13);
  const auto inputs = bound_inputs(hmm, aligned, traj.obs);
  if (inputs.rho_hat >= inputs.rho_star) {
    const int n = 80;
    CHECK(prop2_bound(inputs, n, n) >= prop1_bound(inputs, n));
  }
}

TEST_CASE("prop2_bound: flagged infinite when the estimated chain loses mixing") {
  const auto hmm = model::two_state_benchmark();
  auto est = exact_estimate(hmm, bases::histogram(16));
  est.q_hat << 1.0, 0.0, 0.8, 0.2;  // delta_hat = 0
  est.pi_hat = ProbVec::normalized((Vec(2) << 1.0, 0.0).finished().array().max(1e-9).matrix());
  const std::vector<double> obs{0.3, 0.4, 0.5};
  const auto inputs = bound_inputs(hmm, est, obs);
  CHECK_FALSE(inputs.delta_hat_positive);
  CHECK(prop2_bound(inputs, 1, 3) == std::numeric_limits<double>::infinity());
  CHECK(std::isfinite(prop1_bound(inputs, 3)));  // filtering bound unaffected
}

TEST_CASE("audit_run: clean run has no violations") {
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(11);
  const auto quad = bases::Quadrature::for_projection(spec);
  const Mat o_true = model::emission_coefficients(hmm, spec, quad);

  const auto traj = model::sample_trajectory(hmm, 20000 + 100, 31);
  const std::span<const double> estimation(traj.obs.data(), 20000);
  const std::span<const double> segment(traj.obs.data() + 20000, 100);
  const auto moments = spectral::empirical_moments(estimation, spec);
  const auto est = spectral::fit(moments, spec, 2, 77);
  const auto aligned = apply_alignment(est, align(o_true, est.o_hat));
  const auto report = audit_run(hmm, aligned, segment);
  CHECK(report.flags_clean);
  CHECK(report.filter_violations == 0);
  CHECK(report.smooth_violations == 0);
  CHECK(report.lhs_filter.size() == 100);
  for (int t = 0; t < 100; ++t) {
    CHECK(report.lhs_filter(t) <= report.rhs_filter(t));
    CHECK(report.lhs_smooth(t) <= report.rhs_smooth(t));
  }
}

TEST_CASE("rate_study: population row is exact and medians decay") {
  const auto hmm = model::two_state_benchmark();
  const auto spec = bases::histogram(8);
  const std::vector<std::int64_t> grid{1000, 4000};
  const auto table = rate_study(hmm, spec, grid, 5, 42, true);
  REQUIRE(table.size() == 3);
  CHECK(table[0].p == -1);
  CHECK(table[0].median_p_err <= 1e-12);
  CHECK(table[0].median_m3_err <= 1e-12);
  CHECK(table[0].median_coeff_err <= 1e-12);
  CHECK(table[1].p == 1000);
  CHECK(table[2].median_p_err < table[1].median_p_err);
}

TEST_CASE("rate_study: tensor error grows with the basis size at fixed p") {
  const auto hmm = model::two_state_benchmark();
  const std::vector<std::int64_t> grid{4000};
  const auto small = rate_study(hmm, bases::histogram(8), grid, 10, 7);
  const auto large = rate_study(hmm, bases::histogram(16), grid, 10, 7);
  CHECK(large[0].median_m3_err > small[0].median_m3_err);
}

TEST_CASE("quantile: deterministic order statistics") {
  std::vector<double> v{5, 1, 4, 2, 3};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 0.5) == 3.0);
  CHECK(quantile(v, 1.0) == 5.0);
  CHECK(quantile(v, 0.25) == 2.0);
}
