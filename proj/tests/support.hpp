// Shared test fixtures: randomized models with the conditioning the
// moment-based recovery needs.
#ifndef SPECHMM_TESTS_SUPPORT_HPP
#define SPECHMM_TESTS_SUPPORT_HPP

#include "spechmm/bases.hpp"
#include "spechmm/model.hpp"
#include "spechmm/numerics.hpp"
#include "spechmm/rng.hpp"

namespace test_support {

using spechmm::Mat;
using spechmm::Vec;

// Row-stochastic K x K matrix with every entry at least `floor` and
// smallest singular value bounded away from zero.
inline Mat random_full_rank_transition(spechmm::Rng& rng, int k, double floor = 0.06) {
  for (;;) {
    Mat q(k, k);
    for (int i = 0; i < k; ++i) {
      Vec row(k);
      for (int j = 0; j < k; ++j) row(j) = rng.uniform();
      row /= row.sum();
      q.row(i) = ((1.0 - k * floor) * row.array() + floor).transpose();
    }
    if (spechmm::numerics::smallest_singular_value(q) >= 0.05) return q;
  }
}

// Random model with single-component beta emissions whose projections stay
// well separated, so the recovery problem is well posed.
inline spechmm::model::HmmSpec random_hmm(spechmm::Rng& rng, int k,
                                          const spechmm::bases::BasisSpec& spec) {
  const auto quad = spechmm::bases::Quadrature::for_projection(spec);
  for (;;) {
    spechmm::model::HmmSpec hmm;
    hmm.num_states = k;
    hmm.q = random_full_rank_transition(rng, k);
    hmm.pi = spechmm::numerics::stationary_of(hmm.q);
    hmm.emissions.clear();
    for (int x = 0; x < k; ++x) {
      const double alpha = 1.0 + 5.0 * rng.uniform();
      const double beta = 1.0 + 5.0 * rng.uniform();
      hmm.emissions.push_back({spechmm::model::BetaComponent{1.0, alpha, beta}});
    }
    const Mat o = spechmm::model::emission_coefficients(hmm, spec, quad);
    if (spechmm::numerics::smallest_singular_value(o) < 0.05) continue;
    double gamma = std::numeric_limits<double>::infinity();
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b)
        gamma = std::min(gamma, (o.col(a) - o.col(b)).norm());
    if (gamma < 0.2) continue;
    return hmm;
  }
}

}  // namespace test_support

#endif  // SPECHMM_TESTS_SUPPORT_HPP
