#include "spechmm/model.hpp"

#include "spechmm/numerics.hpp"
#include "spechmm/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace spechmm::model {

namespace {

double log_beta_fn(double alpha, double beta) {
  return std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
}

}  // namespace

double beta_mixture_density(const BetaMixture& mix, double y) {
  double value = 0.0;
  for (const BetaComponent& c : mix) {
    const double log_norm = log_beta_fn(c.alpha, c.beta);
    value += c.weight * std::pow(y, c.alpha - 1.0) * std::pow(1.0 - y, c.beta - 1.0) /
             std::exp(log_norm);
  }
  return value;
}

void HmmSpec::validate() const {
  if (num_states < 1) throw DomainError("HmmSpec: state count must be positive");
  if (q.rows() != num_states || q.cols() != num_states)
    throw DimensionError("HmmSpec: transition matrix shape mismatch");
  if (!q.allFinite()) throw DomainError("HmmSpec: non-finite transition entry");
  if (q.minCoeff() < 0.0 || q.maxCoeff() > 1.0)
    throw DomainError("HmmSpec: transition entries outside [0, 1]");
  for (int i = 0; i < num_states; ++i) {
    if (std::abs(q.row(i).sum() - 1.0) > 1e-9)
      throw DomainError("HmmSpec: transition row does not sum to 1");
  }
  if (pi.dim() != num_states) throw DimensionError("HmmSpec: initial law dimension mismatch");
  if (static_cast<int>(emissions.size()) != num_states)
    throw DimensionError("HmmSpec: one emission mixture required per state");
  for (const BetaMixture& mix : emissions) {
    if (mix.empty()) throw DomainError("HmmSpec: empty emission mixture");
    double wsum = 0.0;
    for (const BetaComponent& c : mix) {
      if (c.weight < 0.0) throw DomainError("HmmSpec: negative mixture weight");
      if (!(c.alpha > 0.0) || !(c.beta > 0.0))
        throw DomainError("HmmSpec: beta parameters must be positive");
      wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
      throw DomainError("HmmSpec: mixture weights do not sum to 1");
  }
  if (pi_is_stationary) {
    const Vec residual = q.transpose() * pi.vec() - pi.vec();
    if (residual.norm() > 1e-10)
      throw DomainError("HmmSpec: initial law is not stationary for q");
  }
}

HmmSpec two_state_benchmark() {
  HmmSpec hmm;
  hmm.num_states = 2;
  hmm.q = Mat(2, 2);
  hmm.q << 0.4, 0.6, 0.8, 0.2;
  Vec pi(2);
  pi << 4.0 / 7.0, 3.0 / 7.0;
  hmm.pi = ProbVec(pi);
  hmm.emissions = {{BetaComponent{1.0, 2.0, 5.0}}, {BetaComponent{1.0, 4.0, 3.0}}};
  hmm.pi_is_stationary = true;
  hmm.validate();
  return hmm;
}

Trajectory sample_trajectory(const HmmSpec& hmm, std::int64_t n, std::uint64_t seed) {
  hmm.validate();
  if (n < 1) throw DomainError("sample_trajectory: length must be positive");
  Rng rng(seed);
  Trajectory traj;
  traj.seed = seed;
  traj.hidden.resize(static_cast<std::size_t>(n));
  traj.obs.resize(static_cast<std::size_t>(n));

  int state = rng.categorical(hmm.pi.vec());
  for (std::int64_t j = 0; j < n; ++j) {
    if (j > 0) state = rng.categorical(hmm.q.row(state).transpose());
    const BetaMixture& mix = hmm.emissions[static_cast<std::size_t>(state)];
    int comp = 0;
    if (mix.size() > 1) {
      Vec w(static_cast<int>(mix.size()));
      for (int c = 0; c < w.size(); ++c) w(c) = mix[static_cast<std::size_t>(c)].weight;
      comp = rng.categorical(w);
    }
    const BetaComponent& bc = mix[static_cast<std::size_t>(comp)];
    traj.hidden[static_cast<std::size_t>(j)] = state;
    traj.obs[static_cast<std::size_t>(j)] = rng.beta(bc.alpha, bc.beta);
  }
  return traj;
}

double eval_emission(const HmmSpec& hmm, int state, double y) {
  if (state < 0 || state >= hmm.num_states)
    throw DimensionError("eval_emission: state out of range");
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("eval_emission: y outside [0, 1]");
  return beta_mixture_density(hmm.emissions[static_cast<std::size_t>(state)], y);
}

double c_star(const HmmSpec& hmm, double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("c_star: y outside [0, 1]");
  Vec f(hmm.num_states);
  for (int x = 0; x < hmm.num_states; ++x) f(x) = eval_emission(hmm, x, y);
  return (hmm.q * f).minCoeff();
}

MarkovConstants markov_constants(const HmmSpec& hmm, int k_max) {
  hmm.validate();
  if (k_max < 1) throw DomainError("markov_constants: k_max must be positive");
  const int k_states = hmm.num_states;

  MarkovConstants out;
  out.k_max = k_max;
  out.delta_star = hmm.q.minCoeff();
  out.prop_constants_available = out.delta_star > 0.0 && out.delta_star < 1.0;
  if (out.prop_constants_available) {
    out.rho_star = 1.0 - out.delta_star / (1.0 - out.delta_star);
    out.c_big_star = 4.0 * (1.0 - out.delta_star) / out.delta_star;
  }

  if (k_states == 1) {
    out.delta_star = 1.0;
    out.prop_constants_available = false;
    out.g_ps = 1.0;
    out.g_ps_argmax_k = 1;
    out.t_mix = 1.0 + 3.0 * std::numbers::ln2;
    return out;
  }

  const ProbVec pi = numerics::stationary_of(hmm.q);  // StructureError if not primitive
  const Vec sqrt_pi = pi.vec().cwiseSqrt();

  Mat q_power = hmm.q;
  double best = 0.0;
  int best_k = 0;
  for (int k = 1; k <= k_max; ++k) {
    if (k > 1) q_power = q_power * hmm.q;
    // D_pi^{-1} (q^T)^k D_pi q^k is similar to S^T S with
    // S = D_sqrt(pi) q^k D_sqrt(pi)^{-1}, so its spectrum is real in [0, 1].
    Mat s = sqrt_pi.asDiagonal() * q_power * sqrt_pi.cwiseInverse().asDiagonal();
    Mat sym = s.transpose() * s;
    sym = 0.5 * (sym + sym.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    const Vec& lambda = eig.eigenvalues();  // ascending
    const double second = lambda(k_states - 2);
    const double top = lambda(k_states - 1);
    const double gap = (top - second <= 1e-12) ? 0.0 : 1.0 - second;
    const double value = gap / static_cast<double>(k);
    if (value > best) {
      best = value;
      best_k = k;
    }
  }
  if (best <= 0.0)
    throw StructureError("markov_constants: pseudo spectral gap is zero (chain not mixing)");
  out.g_ps = best;
  out.g_ps_argmax_k = best_k;
  const double pi_min = pi.vec().minCoeff();
  out.t_mix = (1.0 + 3.0 * std::numbers::ln2 - std::log(pi_min)) / out.g_ps;
  return out;
}

double c_star_constant(const MarkovConstants& constants, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("c_star_constant: delta outside (0, 1)");
  if (constants.g_ps <= 0.0)
    throw StructureError("c_star_constant: pseudo spectral gap unavailable");
  return std::sqrt(2.0 / constants.g_ps) + 2.0 * std::sqrt(-2.0 * constants.t_mix * std::log(delta));
}

double c_star_constant(const HmmSpec& hmm, double delta) {
  return c_star_constant(markov_constants(hmm), delta);
}

Mat emission_coefficients(const HmmSpec& hmm, const bases::BasisSpec& spec,
                          const bases::Quadrature& quad) {
  hmm.validate();
  Mat o(spec.size, hmm.num_states);
  for (int x = 0; x < hmm.num_states; ++x) {
    const BetaMixture& mix = hmm.emissions[static_cast<std::size_t>(x)];
    const auto coeffs =
        bases::project_density([&](double y) { return beta_mixture_density(mix, y); }, spec, quad);
    o.col(x) = coeffs.coefficients;
  }
  return o;
}

MomentSet population_moments(const Mat& o, const Mat& q, const ProbVec& pi) {
  const int m = static_cast<int>(o.rows());
  const int k = static_cast<int>(o.cols());
  if (q.rows() != k || q.cols() != k || pi.dim() != k)
    throw DimensionError("population_moments: dimension mismatch");
  const Vec check = q.transpose() * pi.vec() - pi.vec();
  if (check.norm() > 1e-8)
    throw DomainError("population_moments: pi is not stationary for q");

  MomentSet moments;
  moments.l = o * pi.vec();
  const Mat d_pi_q = pi.vec().asDiagonal() * q;
  moments.n = o * d_pi_q * o.transpose();
  moments.p = o * d_pi_q * q * o.transpose();
  moments.m3 = Tensor3(m);
  for (int b = 0; b < m; ++b) {
    const Vec row_b = o.row(b).transpose();
    moments.m3.slice(b) = o * d_pi_q * row_b.asDiagonal() * q * o.transpose();
  }
  moments.sample_count.reset();
  moments.validate();
  return moments;
}

}  // namespace spechmm::model
